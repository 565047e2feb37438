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

use std::collections::VecDeque;

use super::MetricsError;
use crate::graph::{Graph, NodeId};

/// Global clustering coefficient: three times the triangle count over the
/// number of connected triples. 0 when there are no triples.
pub fn transitivity(graph: &Graph) -> f64 {
    let mut triangles = 0usize;
    let mut triples = 0usize;
    for u in 0..graph.node_count() {
        let d = graph.degree(u);
        triples += d * d.saturating_sub(1) / 2;
        for v in graph.neighbor_ids(u).filter(|&v| v > u) {
            // Count w > v adjacent to both, so each triangle is seen once.
            let (a, b) = (graph.neighbors(u), graph.neighbors(v));
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].0.cmp(&b[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if a[i].0 > v {
                            triangles += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

pub(crate) fn bfs_hops(graph: &Graph, source: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; graph.node_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes are reached");
        for v in graph.neighbor_ids(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Sum of unweighted shortest-path lengths over unordered pairs of `nodes`
/// (every node when `None`), with the pair count.
pub fn path_length_total(graph: &Graph, nodes: Option<&[NodeId]>) -> Result<(u64, u64), MetricsError> {
    let all: Vec<NodeId>;
    let nodes = match nodes {
        Some(s) => s,
        None => {
            all = (0..graph.node_count()).collect();
            &all
        }
    };
    if nodes.len() < 2 {
        return Err(MetricsError::TooFewNodes(nodes.len()));
    }
    let mut total = 0u64;
    for (i, &a) in nodes.iter().enumerate() {
        let dist = bfs_hops(graph, a);
        for &b in &nodes[i + 1..] {
            match dist[b] {
                Some(d) => total += d as u64,
                None => return Err(MetricsError::Disconnected(a, b)),
            }
        }
    }
    let k = nodes.len() as u64;
    Ok((total, k * (k - 1) / 2))
}

pub fn avg_path_length(graph: &Graph, nodes: Option<&[NodeId]>) -> Result<f64, MetricsError> {
    let (total, pairs) = path_length_total(graph, nodes)?;
    Ok(total as f64 / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitivity_fixtures() {
        let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(transitivity(&triangle), 1.0);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(transitivity(&star), 0.0);
        // Triangle with a pendant: 1 triangle, triples 1 + 1 + 3 + 0 = 5.
        let kite = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert!((transitivity(&kite) - 3.0 / 5.0).abs() < 1e-15);
        assert_eq!(transitivity(&Graph::empty(3)), 0.0);
    }

    #[test]
    fn path_lengths() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!((avg_path_length(&path, None).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(avg_path_length(&k4, Some(&[0, 2, 3])).unwrap(), 1.0);
        assert_eq!(path_length_total(&path, Some(&[0, 2])).unwrap(), (2, 1));
    }

    #[test]
    fn path_length_errors() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            avg_path_length(&g, Some(&[0, 3])),
            Err(MetricsError::Disconnected(0, 3))
        );
        assert_eq!(avg_path_length(&g, Some(&[1])), Err(MetricsError::TooFewNodes(1)));
    }
}
