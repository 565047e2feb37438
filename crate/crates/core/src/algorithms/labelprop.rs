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

//! Label propagation and its speaker-listener overlapping variant.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RunError, SWEEP_CAP};
use crate::graph::{Cover, Graph, NodeId};

/// Labels carrying the largest total weight in `votes`.
fn heaviest(votes: &BTreeMap<usize, f64>) -> Vec<usize> {
    let best = votes.values().copied().fold(f64::NEG_INFINITY, f64::max);
    votes
        .iter()
        .filter(|&(_, &w)| w >= best - 1e-12 * best.abs())
        .map(|(&l, _)| l)
        .collect()
}

/// Asynchronous majority label propagation. A node keeps its label while
/// that label is among the heaviest; other ties are broken at random.
pub(super) fn label_propagation(graph: &Graph, seed: u64) -> Result<Cover, RunError> {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<NodeId> = (0..n).collect();
    for _ in 0..SWEEP_CAP {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            if graph.degree(v) == 0 {
                continue;
            }
            let mut votes = BTreeMap::new();
            for &(u, w) in graph.neighbors(v) {
                *votes.entry(labels[u]).or_insert(0.0) += w;
            }
            let top = heaviest(&votes);
            if !top.contains(&labels[v]) {
                labels[v] = *top.choose(&mut rng).expect("non-empty votes");
                changed = true;
            }
        }
        if !changed {
            return Ok(Cover::from_labels(&labels));
        }
    }
    Err(RunError::NonConvergence(SWEEP_CAP))
}

/// Speaker-listener label propagation over `iterations` rounds, keeping the
/// labels whose memory share is at least `threshold`.
pub(super) fn slpa(graph: &Graph, threshold: f64, iterations: usize, seed: u64) -> Cover {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memory: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut order: Vec<NodeId> = (0..n).collect();
    for _ in 0..iterations {
        order.shuffle(&mut rng);
        for &listener in &order {
            if graph.degree(listener) == 0 {
                continue;
            }
            let mut heard = BTreeMap::new();
            for &(speaker, w) in graph.neighbors(listener) {
                let said = memory[speaker][rng.gen_range(0..memory[speaker].len())];
                *heard.entry(said).or_insert(0.0) += w;
            }
            let top = heaviest(&heard);
            let pick = *top.choose(&mut rng).expect("non-empty");
            memory[listener].push(pick);
        }
    }

    let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (v, mem) in memory.iter().enumerate() {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in mem {
            *counts.entry(l).or_insert(0) += 1;
        }
        let total = mem.len() as f64;
        let mut kept: Vec<usize> = counts
            .iter()
            .filter(|&(_, &c)| c as f64 / total >= threshold)
            .map(|(&l, _)| l)
            .collect();
        if kept.is_empty() {
            let most = counts.values().copied().max().unwrap_or(0);
            kept.extend(counts.iter().find(|&(_, &c)| c == most).map(|(&l, _)| l));
        }
        for l in kept {
            groups.entry(l).or_default().push(v);
        }
    }
    let communities = drop_nested(groups.into_values().collect());
    Cover::new(n, communities).expect("labels index valid nodes")
}

/// Removes communities that duplicate or are contained in another one.
pub(super) fn drop_nested(mut communities: Vec<Vec<NodeId>>) -> Vec<Vec<NodeId>> {
    for c in &mut communities {
        c.sort_unstable();
    }
    communities.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Vec<NodeId>> = Vec::new();
    for c in communities {
        let contained = kept.iter().any(|k| c.iter().all(|v| k.binary_search(v).is_ok()));
        if !contained {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques_bridge() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap()
    }

    #[test]
    fn edgeless_graph_stays_singletons() {
        let c = label_propagation(&Graph::empty(4), 0).unwrap();
        assert_eq!(c.canonical(), Cover::singletons(4));
    }

    #[test]
    fn clique_collapses_to_one_label() {
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((a, b));
            }
        }
        let g = Graph::from_edges(5, edges).unwrap();
        for seed in 0..10 {
            assert_eq!(label_propagation(&g, seed).unwrap(), Cover::whole(5));
        }
    }

    #[test]
    fn labels_are_stable_at_termination() {
        let g = two_cliques_bridge();
        for seed in 0..20 {
            let c = label_propagation(&g, seed).unwrap();
            let labels = c.labels().unwrap();
            for v in 0..6 {
                let mut votes = BTreeMap::new();
                for &(u, w) in g.neighbors(v) {
                    *votes.entry(labels[u]).or_insert(0.0) += w;
                }
                assert!(heaviest(&votes).contains(&labels[v]));
            }
        }
    }

    #[test]
    fn slpa_above_half_threshold_is_a_partition() {
        let g = two_cliques_bridge();
        for seed in 0..5 {
            assert!(slpa(&g, 0.6, 50, seed).is_partition());
        }
    }

    #[test]
    fn nested_and_duplicate_groups_removed() {
        let out = drop_nested(vec![vec![0, 1], vec![1, 0], vec![0, 1, 2], vec![3]]);
        assert_eq!(out, vec![vec![0, 1, 2], vec![3]]);
    }
}
