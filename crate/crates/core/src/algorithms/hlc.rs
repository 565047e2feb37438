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

//! Hierarchical link clustering.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Cover, Graph, NodeId};

/// Jaccard similarity of the inclusive neighbourhoods of `a` and `b`.
fn jaccard(inclusive: &[BTreeSet<NodeId>], a: NodeId, b: NodeId) -> f64 {
    let both = inclusive[a].intersection(&inclusive[b]).count();
    let either = inclusive[a].len() + inclusive[b].len() - both;
    both as f64 / either as f64
}

/// Partition density of a set of edge clusters; `members[c]` is
/// `(edges, nodes)` of cluster `c`.
pub(super) fn partition_density(members: &[(usize, usize)], total_edges: usize) -> f64 {
    let sum: f64 = members
        .iter()
        .filter(|&&(_, nodes)| nodes > 2)
        .map(|&(m, nc)| {
            let (m, nc) = (m as f64, nc as f64);
            m * (m - (nc - 1.0)) / ((nc - 2.0) * (nc - 1.0))
        })
        .sum();
    2.0 * sum / total_edges as f64
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn density_of(graph: &Graph, parent: &mut [usize]) -> f64 {
    let mut groups: BTreeMap<usize, (usize, BTreeSet<NodeId>)> = BTreeMap::new();
    for (i, e) in graph.edges().iter().enumerate() {
        let g = groups.entry(find(parent, i)).or_default();
        g.0 += 1;
        g.1.insert(e.u);
        g.1.insert(e.v);
    }
    let sizes: Vec<(usize, usize)> = groups.values().map(|(m, s)| (*m, s.len())).collect();
    partition_density(&sizes, graph.edge_count())
}

/// Single-linkage clustering of edges by neighbourhood similarity, cut at the
/// level of maximum partition density. Each edge cluster becomes the node
/// community of its endpoints.
pub(super) fn link_communities(graph: &Graph) -> Cover {
    let n = graph.node_count();
    let m = graph.edge_count();
    if m == 0 {
        return Cover::singletons(n);
    }
    let inclusive: Vec<BTreeSet<NodeId>> = (0..n)
        .map(|v| graph.neighbor_ids(v).chain(std::iter::once(v)).collect())
        .collect();
    let edge_index: BTreeMap<(NodeId, NodeId), usize> =
        graph.edges().iter().enumerate().map(|(i, e)| ((e.u, e.v), i)).collect();
    let key = |a: NodeId, b: NodeId| edge_index[&(a.min(b), a.max(b))];

    // Pairs of edges sharing exactly one endpoint.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for k in 0..n {
        let around: Vec<NodeId> = graph.neighbor_ids(k).collect();
        for (x, &i) in around.iter().enumerate() {
            for &j in &around[x + 1..] {
                pairs.push((jaccard(&inclusive, i, j), key(i, k), key(j, k)));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut parent: Vec<usize> = (0..m).collect();
    let mut best_parent = parent.clone();
    let mut best_density = density_of(graph, &mut parent);
    let mut idx = 0;
    while idx < pairs.len() {
        let level = pairs[idx].0;
        let mut merged = false;
        while idx < pairs.len() && pairs[idx].0 == level {
            let (a, b) = (find(&mut parent, pairs[idx].1), find(&mut parent, pairs[idx].2));
            if a != b {
                parent[a.max(b)] = a.min(b);
                merged = true;
            }
            idx += 1;
        }
        if merged {
            let d = density_of(graph, &mut parent);
            if d > best_density + 1e-12 {
                best_density = d;
                best_parent = parent.clone();
            }
        }
    }

    let mut groups: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
    for (i, e) in graph.edges().iter().enumerate() {
        let g = groups.entry(find(&mut best_parent, i)).or_default();
        g.insert(e.u);
        g.insert(e.v);
    }
    let mut communities: Vec<Vec<NodeId>> = groups.into_values().map(|s| s.into_iter().collect()).collect();
    communities.sort();
    communities.dedup();
    Cover::new(n, communities).expect("edge endpoints are graph nodes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_of_known_clusters() {
        // A triangle (3 edges, 3 nodes) contributes 3 * 1 / (1 * 2).
        assert!((partition_density(&[(3, 3)], 3) - 1.0).abs() < 1e-12);
        // A tree cluster has no excess edges.
        assert_eq!(partition_density(&[(3, 4)], 3), 0.0);
        assert_eq!(partition_density(&[(1, 2), (1, 2)], 2), 0.0);
    }

    #[test]
    fn shared_node_sits_in_both_communities() {
        // Two 4-cliques sharing node 3.
        let mut edges = Vec::new();
        for group in [[0, 1, 2, 3], [3, 4, 5, 6]] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((group[a], group[b]));
                }
            }
        }
        let g = Graph::from_edges(7, edges).unwrap();
        let c = link_communities(&g);
        assert_eq!(c.canonical().communities(), &[vec![0, 1, 2, 3], vec![3, 4, 5, 6]]);
    }
}
