// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Undirected simple graphs and node covers.
//!
//! Both types are immutable once built, so they can be shared freely across
//! detector worker threads.

mod cover;
mod io;

pub use cover::Cover;
pub use io::{
    load_cover, load_graph, load_graph_with, load_labeled_cover, read_id_map, write_cover, write_graph, write_id_map,
    write_labeled_cover, IdMap, LoadOptions, LoadedGraph,
};

use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: self-loop on node `{label}`")]
    SelfLoop { line: usize, label: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: edge weight {weight} must be finite and strictly positive")]
    InvalidWeight { line: usize, weight: f64 },
    #[error("line {line}: node id {node} out of range for a graph of {n} nodes")]
    OutOfRange { line: usize, node: usize, n: usize },
    #[error("line {line}: reciprocal arc `{label_a} {label_b}` found; input looks directed (load with symmetrize to merge arcs)")]
    Directed {
        line: usize,
        label_a: String,
        label_b: String,
    },
    #[error("duplicate label `{0}` in id map")]
    DuplicateLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

/// Undirected simple graph over dense node ids `0..n`.
///
/// Edges are stored once with `u < v`, sorted; adjacency lists are sorted by
/// neighbour id. Every stored weight is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, f64)>>,
    strength: Vec<f64>,
    total_weight: f64,
    weighted: bool,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            strength: vec![0.0; n],
            total_weight: 0.0,
            weighted: false,
        }
    }

    /// Builds an unweighted graph. Duplicate pairs collapse into one edge
    /// whose weight is the number of occurrences.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::from_weighted_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    /// Builds a graph from weighted pairs; duplicates have their weights summed.
    pub fn from_weighted_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut list: Vec<Edge> = Vec::new();
        for (u, v, weight) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::OutOfRange { line: 0, node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: 0,
                    label: u.to_string(),
                });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::InvalidWeight { line: 0, weight });
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            list.push(Edge { u, v, weight });
        }
        list.sort_by_key(|a| (a.u, a.v));
        let mut merged: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => last.weight += e.weight,
                _ => merged.push(e),
            }
        }
        Ok(Self::from_canonical(n, merged))
    }

    /// `edges` must already be sorted, deduplicated and oriented `u < v`.
    fn from_canonical(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut strength = vec![0.0; n];
        let mut total_weight = 0.0;
        let mut weighted = false;
        for e in &edges {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
            strength[e.u] += e.weight;
            strength[e.v] += e.weight;
            total_weight += e.weight;
            weighted |= e.weight != 1.0;
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        Graph {
            n,
            edges,
            adj,
            strength,
            total_weight,
            weighted,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.adj[u]
    }

    pub fn neighbor_ids(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[u].iter().map(|&(v, _)| v)
    }

    /// Number of incident edges, ignoring weights.
    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, u: NodeId) -> f64 {
        self.strength[u]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// True when at least one edge carries a weight other than 1.
    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.adj[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.n && v < self.n && self.edge_weight(u, v).is_some()
    }

    /// Same topology with every weight reset to 1.
    pub fn unweighted(&self) -> Graph {
        let edges = self.edges.iter().map(|e| Edge { weight: 1.0, ..*e }).collect();
        Self::from_canonical(self.n, edges)
    }

    /// Connected-component label per node; labels are dense and ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for v in self.neighbor_ids(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_pairs_collapse_with_summed_weight() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edge_weight(0, 1), Some(2.0));
        assert!(g.is_weighted());
        assert_eq!(g.strength(1), 3.0);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        assert!(matches!(
            Graph::from_edges(2, [(1, 1)]),
            Err(GraphError::SelfLoop { .. })
        ));
        assert!(matches!(
            Graph::from_weighted_edges(2, [(0, 1, 0.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Graph::from_weighted_edges(2, [(0, 1, -1.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(GraphError::OutOfRange { .. })
        ));
    }

    #[test]
    fn components_are_labelled_by_first_member() {
        let g = Graph::from_edges(5, [(3, 4), (0, 1)]).unwrap();
        assert_eq!(g.components(), vec![0, 0, 1, 2, 2]);
    }
}
