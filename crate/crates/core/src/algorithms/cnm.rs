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

//! Greedy agglomerative modularity merging.

use std::collections::BTreeMap;

use crate::graph::{Cover, Graph};

/// Merges the adjacent pair with the largest modularity gain
/// `2 (e_ij - a_i a_j)` until no merge gains. Ties go to the smallest pair.
pub(super) fn cnm(graph: &Graph) -> Cover {
    let n = graph.node_count();
    let two_w = 2.0 * graph.total_weight();
    let mut labels: Vec<usize> = (0..n).collect();
    if two_w <= 0.0 {
        return Cover::from_labels(&labels);
    }
    // e[i][j]: fraction of edge ends joining i to j, held once per direction.
    let mut e: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for edge in graph.edges() {
        *e[edge.u].entry(edge.v).or_insert(0.0) += edge.weight / two_w;
        *e[edge.v].entry(edge.u).or_insert(0.0) += edge.weight / two_w;
    }
    let mut a: Vec<f64> = (0..n).map(|v| graph.strength(v) / two_w).collect();
    let mut alive = vec![true; n];

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| alive[i]) {
            for (&j, &eij) in e[i].range(i + 1..) {
                let gain = 2.0 * (eij - a[i] * a[j]);
                if best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, i, j));
                }
            }
        }
        let Some((gain, i, j)) = best else { break };
        if gain <= 1e-15 {
            break;
        }
        // Fold j into i.
        let row = std::mem::take(&mut e[j]);
        for (k, w) in row {
            e[k].remove(&j);
            if k == i {
                continue;
            }
            *e[i].entry(k).or_insert(0.0) += w;
            *e[k].entry(i).or_insert(0.0) += w;
        }
        e[i].remove(&j);
        a[i] += a[j];
        alive[j] = false;
        for l in labels.iter_mut() {
            if *l == j {
                *l = i;
            }
        }
    }
    Cover::from_labels(&labels)
}
