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

//! Average-linkage agglomeration on neighbourhood cosine similarity.

use crate::graph::{Cover, Graph, NodeId};

/// Target cluster count for grid level `level` in `0..=4`: five evenly
/// spaced counts from 2 up to `max(2, ceil(n / 5))`.
pub(super) fn cut_for_level(n: usize, level: usize) -> usize {
    let hi = 2usize.max(n.div_ceil(5)) as f64;
    (2.0 + level as f64 * (hi - 2.0) / 4.0).round() as usize
}

/// Cosine similarity of adjacency rows with unit self-loops, so that
/// neighbours always share at least one another.
pub(super) fn cosine_matrix(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let rows: Vec<Vec<(NodeId, f64)>> = (0..n)
        .map(|v| {
            let mut row = graph.neighbors(v).to_vec();
            row.push((v, 1.0));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let norm: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt())
        .collect();
    let mut sim = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let (mut i, mut j, mut dot) = (0, 0, 0.0);
            let (ra, rb) = (&rows[a], &rows[b]);
            while i < ra.len() && j < rb.len() {
                match ra[i].0.cmp(&rb[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        dot += ra[i].1 * rb[j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            let s = dot / (norm[a] * norm[b]);
            sim[a][b] = s;
            sim[b][a] = s;
        }
    }
    sim
}

/// Merges the pair with the highest average similarity until `clusters`
/// remain or no positively similar pair is left.
pub(super) fn neighborhood_agglomeration(graph: &Graph, clusters: usize) -> Cover {
    let n = graph.node_count();
    let mut total = cosine_matrix(graph);
    let mut size = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut labels: Vec<usize> = (0..n).collect();
    let mut count = n;
    while count > clusters {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in (0..n).filter(|&a| alive[a]) {
            for b in (a + 1..n).filter(|&b| alive[b]) {
                if total[a][b] <= 0.0 {
                    continue;
                }
                let avg = total[a][b] / (size[a] * size[b]) as f64;
                if best.is_none_or(|x| avg > x.0) {
                    best = Some((avg, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        for c in 0..n {
            if alive[c] && c != a && c != b {
                total[a][c] += total[b][c];
                total[c][a] = total[a][c];
            }
        }
        size[a] += size[b];
        alive[b] = false;
        count -= 1;
        for l in labels.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
    }
    Cover::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_levels_span_range() {
        assert_eq!(
            (0..5).map(|l| cut_for_level(100, l)).collect::<Vec<_>>(),
            vec![2, 7, 11, 16, 20]
        );
        assert_eq!((0..5).map(|l| cut_for_level(6, l)).collect::<Vec<_>>(), vec![2; 5]);
    }

    #[test]
    fn cosine_of_twins_is_one() {
        // 0 and 1 are adjacent with the same other neighbours.
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]).unwrap();
        let s = cosine_matrix(&g);
        assert!((s[0][1] - 1.0).abs() < 1e-12);
        // Rows {0,1,2} (+self) for 2 and {0,1,3} for 3: overlap {0,1}, norms sqrt(3).
        assert!((s[2][3] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn average_linkage_splits_bridged_cliques() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap();
        let c = neighborhood_agglomeration(&g, 2);
        assert_eq!(c.canonical().communities(), &[vec![0, 1, 2], vec![3, 4, 5]]);
    }
}
