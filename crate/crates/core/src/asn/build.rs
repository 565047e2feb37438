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

//! Aggregating per-network similarity into network edge weights.

use std::collections::{BTreeMap, BTreeSet};

use super::{pair, AsnError, AsnNet, SimilarityMatrix, SimilarityStore};

pub const DEFAULT_TOP_K: usize = 5;

/// Peers of row `i` whose similarity reaches the k-th highest value.
fn top_peers(matrix: &SimilarityMatrix, i: usize, k: usize) -> BTreeSet<usize> {
    let mut sims: Vec<f64> = (0..matrix.len())
        .filter(|&j| j != i)
        .map(|j| matrix.value(i, j))
        .collect();
    if sims.is_empty() || k == 0 {
        return BTreeSet::new();
    }
    sims.sort_by(|a, b| b.total_cmp(a));
    let cutoff = sims[k.min(sims.len()) - 1];
    (0..matrix.len())
        .filter(|&j| j != i && matrix.value(i, j) >= cutoff)
        .collect()
}

/// Unordered pairs in which each algorithm is among the other's `k` most
/// similar peers. Ties at the k-th value are all admitted.
pub fn mutual_topk(matrix: &SimilarityMatrix, k: usize) -> BTreeSet<(String, String)> {
    let tops: Vec<BTreeSet<usize>> = (0..matrix.len()).map(|i| top_peers(matrix, i, k)).collect();
    let ids = matrix.ids();
    let mut out = BTreeSet::new();
    for (i, peers) in tops.iter().enumerate() {
        for &j in peers.range(i + 1..) {
            if tops[j].contains(&i) {
                out.insert(pair(&ids[i], &ids[j]));
            }
        }
    }
    out
}

fn with_all_nodes(store: &SimilarityStore) -> AsnNet {
    AsnNet::new(store.algorithms())
}

/// Number of networks on which each pair is mutually top-`k`.
pub fn accumulate(store: &SimilarityStore, k: usize) -> AsnNet {
    let mut net = with_all_nodes(store);
    for (_, matrix) in store.iter() {
        for (a, b) in mutual_topk(matrix, k) {
            net.add_weight(&a, &b, 1.0);
        }
    }
    net
}

/// Mean similarity over the networks where both algorithms have output.
/// Pairs averaging zero get no edge.
pub fn aggregate_average(store: &SimilarityStore) -> AsnNet {
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for (_, m) in store.iter() {
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let e = sums.entry(pair(&m.ids()[i], &m.ids()[j])).or_default();
                e.0 += m.value(i, j);
                e.1 += 1;
            }
        }
    }
    let mut net = with_all_nodes(store);
    for ((a, b), (sum, count)) in sums {
        let mean = sum / count as f64;
        if mean > 0.0 {
            net.set_weight(&a, &b, mean);
        }
    }
    net
}

/// Number of networks on which the pair's similarity exceeds `tau`.
pub fn aggregate_threshold(store: &SimilarityStore, tau: f64) -> Result<AsnNet, AsnError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(AsnError::ThresholdOutOfRange(tau));
    }
    let mut net = with_all_nodes(store);
    for (_, m) in store.iter() {
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                if m.value(i, j) > tau {
                    net.add_weight(&m.ids()[i], &m.ids()[j], 1.0);
                }
            }
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::needless_range_loop)]
    fn matrix(ids: &[&str], upper: &[f64]) -> SimilarityMatrix {
        let n = ids.len();
        let mut v = vec![vec![1.0; n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let x = *it.next().unwrap();
                v[i][j] = x;
                v[j][i] = x;
            }
        }
        SimilarityMatrix::new(ids.iter().map(|s| s.to_string()).collect(), v).unwrap()
    }

    fn p(a: &str, b: &str) -> (String, String) {
        pair(a, b)
    }

    #[test]
    fn small_matrix_all_pairs() {
        let m = matrix(&["a", "b", "c"], &[0.1, 0.2, 0.3]);
        assert_eq!(mutual_topk(&m, 5).len(), 3);
    }

    #[test]
    fn asymmetric_preference_excluded() {
        // a1's best is a2, but a2's best is a3.
        let m = matrix(&["a1", "a2", "a3"], &[0.9, 0.1, 0.95]);
        let top = mutual_topk(&m, 1);
        assert!(!top.contains(&p("a1", "a2")));
        assert!(top.contains(&p("a2", "a3")));
    }

    #[test]
    fn ties_at_cutoff_included() {
        let m = matrix(&["a", "b", "c"], &[0.5, 0.5, 0.2]);
        let top = mutual_topk(&m, 1);
        // a ties b and c; b's best is a, c's best is a.
        assert_eq!(top, [p("a", "b"), p("a", "c")].into_iter().collect());
    }

    #[test]
    fn single_network_gives_binary_weights() {
        let mut store = SimilarityStore::new();
        store.insert("n1", matrix(&["a", "b", "c", "d"], &[0.9, 0.1, 0.1, 0.1, 0.1, 0.8]));
        let net = accumulate(&store, 1);
        assert_eq!(net.weight("a", "b"), 1.0);
        assert_eq!(net.weight("c", "d"), 1.0);
        assert_eq!(net.edge_count(), 2);
    }

    #[test]
    fn clones_reach_network_count() {
        let mut store = SimilarityStore::new();
        for n in 0..100 {
            let x = (n as f64 * 0.37).fract() * 0.5;
            store.insert(&format!("net{n:03}"), matrix(&["a", "clone", "z"], &[1.0, x, x]));
        }
        assert_eq!(accumulate(&store, 1).weight("a", "clone"), 100.0);
    }

    #[test]
    fn averages_and_thresholds() {
        let mut store = SimilarityStore::new();
        store.insert("n1", matrix(&["a", "b"], &[1.0]));
        store.insert("n2", matrix(&["a", "b", "c"], &[0.5, 0.4, 0.2]));
        let avg = aggregate_average(&store);
        assert_eq!(avg.weight("a", "b"), 0.75);
        assert_eq!(avg.weight("a", "c"), 0.4);
        let thr = aggregate_threshold(&store, 0.45).unwrap();
        assert_eq!(thr.weight("a", "b"), 2.0);
        assert_eq!(thr.weight("a", "c"), 0.0);
        assert_eq!(aggregate_threshold(&store, 1.0).unwrap().weight("a", "b"), 0.0);
        assert!(aggregate_threshold(&store, 1.5).is_err());
    }

    #[test]
    fn absent_algorithms_do_not_count() {
        let mut store = SimilarityStore::new();
        store.insert("n1", matrix(&["a", "b"], &[0.3]));
        store.insert("n2", matrix(&["a", "c"], &[0.3]));
        let net = accumulate(&store, 5);
        assert_eq!(net.weight("a", "b"), 1.0);
        assert_eq!(net.weight("b", "c"), 0.0);
        assert_eq!(net.node_count(), 3);
    }
}
