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

//! Random-walk distance agglomeration.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Cover, Graph, NodeId};
use crate::metrics::modularity;

/// Probability rows of a `t`-step lazy walk: every node carries a unit
/// self-loop so that bipartite structure does not oscillate.
fn walk_rows(graph: &Graph, t: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = graph.node_count();
    let degree: Vec<f64> = (0..n).map(|v| graph.strength(v) + 1.0).collect();
    let step = |row: &[f64]| {
        let mut next = vec![0.0; n];
        for v in 0..n {
            if row[v] == 0.0 {
                continue;
            }
            let share = row[v] / degree[v];
            next[v] += share;
            for &(u, w) in graph.neighbors(v) {
                next[u] += share * w;
            }
        }
        next
    };
    let rows = (0..n)
        .map(|s| {
            let mut row = vec![0.0; n];
            row[s] = 1.0;
            for _ in 0..t {
                row = step(&row);
            }
            row
        })
        .collect();
    (rows, degree)
}

struct Cluster {
    size: usize,
    profile: Vec<f64>,
    neighbors: BTreeSet<usize>,
}

/// Ward increase of merging two clusters.
fn ward(a: &Cluster, b: &Cluster, degree: &[f64], n: usize) -> f64 {
    let r2: f64 = a
        .profile
        .iter()
        .zip(&b.profile)
        .zip(degree)
        .map(|((x, y), d)| (x - y) * (x - y) / d)
        .sum();
    let (sa, sb) = (a.size as f64, b.size as f64);
    sa * sb / (sa + sb) * r2 / n as f64
}

/// Merges adjacent clusters by smallest Ward increase of walk distance and
/// cuts the dendrogram at maximum modularity.
pub(super) fn walktrap(graph: &Graph, t: usize) -> Cover {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Cover::singletons(n);
    }
    let (rows, degree) = walk_rows(graph, t);
    let mut clusters: Vec<Option<Cluster>> = rows
        .into_iter()
        .enumerate()
        .map(|(v, profile)| {
            Some(Cluster {
                size: 1,
                profile,
                neighbors: graph.neighbor_ids(v).collect(),
            })
        })
        .collect();
    let mut cost: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in graph.edges() {
        let (a, b) = (e.u, e.v);
        let d = ward(clusters[a].as_ref().unwrap(), clusters[b].as_ref().unwrap(), &degree, n);
        cost.insert((a, b), d);
    }

    let mut labels: Vec<NodeId> = (0..n).collect();
    let mut best_labels = labels.clone();
    let mut best_q = modularity(graph, &Cover::from_labels(&labels)).expect("edges present");
    while let Some((&(a, b), _)) = cost
        .iter()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap().then(x.0.cmp(y.0)))
    {
        let cb = clusters[b].take().unwrap();
        let ca = clusters[a].take().unwrap();
        let size = ca.size + cb.size;
        let profile = ca
            .profile
            .iter()
            .zip(&cb.profile)
            .map(|(x, y)| (x * ca.size as f64 + y * cb.size as f64) / size as f64)
            .collect();
        let mut neighbors: BTreeSet<usize> = ca.neighbors.union(&cb.neighbors).copied().collect();
        neighbors.remove(&a);
        neighbors.remove(&b);
        cost.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
        for &c in &neighbors {
            let other = clusters[c].as_mut().unwrap();
            other.neighbors.remove(&b);
            other.neighbors.insert(a);
        }
        let merged = Cluster {
            size,
            profile,
            neighbors,
        };
        for &c in &merged.neighbors {
            let d = ward(&merged, clusters[c].as_ref().unwrap(), &degree, n);
            cost.insert((a.min(c), a.max(c)), d);
        }
        clusters[a] = Some(merged);
        for l in labels.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        let q = modularity(graph, &Cover::from_labels(&labels)).expect("edges present");
        if q > best_q + 1e-12 {
            best_q = q;
            best_labels = labels.clone();
        }
    }
    Cover::from_labels(&best_labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_rows_are_distributions() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let (rows, _) = walk_rows(&g, 3);
        for row in rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ward_cost_matches_definition() {
        let a = Cluster {
            size: 2,
            profile: vec![0.5, 0.5, 0.0],
            neighbors: BTreeSet::new(),
        };
        let b = Cluster {
            size: 1,
            profile: vec![0.0, 0.5, 0.5],
            neighbors: BTreeSet::new(),
        };
        // (2*1/3) * (0.25/1 + 0 + 0.25/2) / 3
        let expected = (2.0 / 3.0) * (0.25 + 0.125) / 3.0;
        assert!((ward(&a, &b, &[1.0, 1.0, 2.0], 3) - expected).abs() < 1e-15);
    }

    #[test]
    fn separates_bridged_cliques() {
        let mut edges = vec![(3, 4)];
        for base in [0, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
        }
        let g = Graph::from_edges(8, edges).unwrap();
        for t in [2, 4] {
            let c = walktrap(&g, t);
            assert_eq!(c.canonical().communities(), &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        }
    }
}
