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

//! Divisive clustering by repeated removal of the highest-betweenness edge.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::{Cover, Graph, NodeId};
use crate::metrics::modularity;

/// Shortest-path edge betweenness on hop distances (Brandes), one entry
/// per adjacency slot.
pub(super) fn edge_betweenness(n: usize, adj: &[BTreeSet<NodeId>]) -> Vec<Vec<(NodeId, f64)>> {
    let mut score: Vec<Vec<(NodeId, f64)>> = adj.iter().map(|s| s.iter().map(|&u| (u, 0.0)).collect()).collect();
    let mut sigma = vec![0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0f64; n];
    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        let mut order = Vec::new();
        let mut queue = VecDeque::from([s]);
        sigma[s] = 1.0;
        dist[s] = 0;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
                if dist[u] == dist[v] + 1 {
                    sigma[u] += sigma[v];
                }
            }
        }
        for &w in order.iter().rev() {
            for (slot, &v) in adj[w].iter().enumerate() {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    delta[v] += c;
                    score[w][slot].1 += c;
                }
            }
        }
    }
    // Contributions land on either endpoint's row, and every pair is
    // counted from both of its sources.
    let mut total = score.clone();
    for (v, row) in total.iter_mut().enumerate() {
        for entry in row.iter_mut() {
            let u = entry.0;
            let back = score[u].iter().find(|&&(x, _)| x == v).map_or(0.0, |&(_, b)| b);
            entry.1 = (entry.1 + back) / 2.0;
        }
    }
    total
}

fn component_labels(n: usize, adj: &[BTreeSet<NodeId>]) -> Vec<usize> {
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if labels[s] != usize::MAX {
            continue;
        }
        labels[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if labels[u] == usize::MAX {
                    labels[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Removes edges in betweenness order through the full dendrogram and
/// returns the component split with the highest modularity on the input.
pub(super) fn girvan_newman(graph: &Graph) -> Cover {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Cover::singletons(n);
    }
    let mut adj: Vec<BTreeSet<NodeId>> = (0..n).map(|v| graph.neighbor_ids(v).collect()).collect();
    let mut best = Cover::from_labels(&component_labels(n, &adj));
    let mut best_q = modularity(graph, &best).expect("partition of a graph with edges");
    let mut components = best.len();
    let mut remaining = graph.edge_count();
    while remaining > 0 {
        let scores = edge_betweenness(n, &adj);
        let mut top: Option<(f64, NodeId, NodeId)> = None;
        for (v, row) in scores.iter().enumerate() {
            for &(u, b) in row {
                if v < u && top.is_none_or(|t| b > t.0 + 1e-9) {
                    top = Some((b, v, u));
                }
            }
        }
        let (_, v, u) = top.expect("edges remain");
        adj[v].remove(&u);
        adj[u].remove(&v);
        remaining -= 1;
        let labels = component_labels(n, &adj);
        let split = Cover::from_labels(&labels);
        if split.len() > components {
            components = split.len();
            let q = modularity(graph, &split).expect("partition");
            if q > best_q + 1e-12 {
                best_q = q;
                best = split;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacency(g: &Graph) -> Vec<BTreeSet<NodeId>> {
        (0..g.node_count()).map(|v| g.neighbor_ids(v).collect()).collect()
    }

    /// Betweenness by enumerating every shortest path between every pair.
    fn brute_betweenness(g: &Graph, a: NodeId, b: NodeId) -> f64 {
        let n = g.node_count();
        let adj = adjacency(g);
        let mut total = 0.0;
        for s in 0..n {
            for t in s + 1..n {
                let mut paths: Vec<Vec<NodeId>> = Vec::new();
                let mut frontier = vec![vec![s]];
                while paths.is_empty() && !frontier.is_empty() {
                    let mut next = Vec::new();
                    for p in frontier {
                        let last = *p.last().unwrap();
                        for &u in &adj[last] {
                            if p.contains(&u) {
                                continue;
                            }
                            let mut q = p.clone();
                            q.push(u);
                            if u == t {
                                paths.push(q);
                            } else {
                                next.push(q);
                            }
                        }
                    }
                    frontier = next;
                }
                if paths.is_empty() {
                    continue;
                }
                let through = paths
                    .iter()
                    .filter(|p| {
                        p.windows(2)
                            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
                    })
                    .count();
                total += through as f64 / paths.len() as f64;
            }
        }
        total
    }

    #[test]
    fn betweenness_matches_path_enumeration() {
        let g = Graph::from_edges(
            7,
            [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6), (1, 4)],
        )
        .unwrap();
        let scores = edge_betweenness(7, &adjacency(&g));
        for (v, row) in scores.iter().enumerate() {
            for &(u, b) in row {
                assert!((b - brute_betweenness(&g, v, u)).abs() < 1e-9, "{v}-{u}");
            }
        }
    }

    #[test]
    fn bridge_removed_first() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap();
        let c = girvan_newman(&g);
        assert_eq!(c.canonical().communities(), &[vec![0, 1, 2], vec![3, 4, 5]]);
    }
}
