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

//! Random node-subset baseline for average path length.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::AnalyzeError;
use crate::graph::{Graph, NodeId};
use crate::metrics::{path_length_total, MetricsError};

/// Draws per trial before giving up on finding a connected subset.
pub const MAX_RESAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NullModelResult {
    pub observed: f64,
    pub samples: Vec<f64>,
    /// Share of samples at or below the observed value.
    pub p_value: f64,
    pub trials: usize,
    pub seed: u64,
    /// Draws rejected because they spanned components.
    pub resamples: usize,
}

/// Compares the mean hop distance within `nodes` to that of uniformly drawn
/// subsets of the same size. Trial `t` draws from its own generator seeded
/// with `seed + t`, so results do not depend on the thread count.
pub fn apl_null_model(
    graph: &Graph,
    nodes: &[NodeId],
    trials: usize,
    seed: u64,
) -> Result<NullModelResult, AnalyzeError> {
    let n = graph.node_count();
    if nodes.len() > n {
        return Err(AnalyzeError::NodeSetTooLarge { size: nodes.len(), n });
    }
    if trials == 0 {
        return Err(AnalyzeError::NoTrials);
    }
    let (observed_total, pairs) = path_length_total(graph, Some(nodes))?;
    let k = nodes.len();
    let draws: Vec<(u64, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            for rejected in 0..MAX_RESAMPLES {
                let subset: Vec<NodeId> = sample(&mut rng, n, k).into_vec();
                match path_length_total(graph, Some(&subset)) {
                    Ok((total, _)) => return Ok((total, rejected)),
                    Err(MetricsError::Disconnected(..)) => continue,
                    Err(e) => return Err(AnalyzeError::Metrics(e)),
                }
            }
            Err(AnalyzeError::ResampleLimit(MAX_RESAMPLES))
        })
        .collect::<Result<_, _>>()?;
    // Same pair count throughout, so totals compare exactly.
    let at_most = draws.iter().filter(|d| d.0 <= observed_total).count();
    Ok(NullModelResult {
        observed: observed_total as f64 / pairs as f64,
        samples: draws.iter().map(|d| d.0 as f64 / pairs as f64).collect(),
        p_value: at_most as f64 / trials as f64,
        trials,
        seed,
        resamples: draws.iter().map(|d| d.1).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clique_is_never_significant() {
        let mut edges = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                edges.push((a, b));
            }
        }
        let g = Graph::from_edges(6, edges).unwrap();
        let r = apl_null_model(&g, &[0, 3, 5], 200, 1).unwrap();
        assert_eq!(r.observed, 1.0);
        assert!(r.samples.iter().all(|&s| s == 1.0));
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn rejects_disconnected_draws() {
        // Two components: a triangle and an edge.
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let r = apl_null_model(&g, &[0, 1], 300, 4).unwrap();
        assert!(r.resamples > 0);
        assert!(r.samples.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn contract_errors() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            apl_null_model(&g, &[0, 1, 2, 0], 10, 0),
            Err(AnalyzeError::NodeSetTooLarge { .. })
        ));
        assert!(matches!(
            apl_null_model(&g, &[0, 2], 10, 0),
            Err(AnalyzeError::Metrics(MetricsError::Disconnected(..)))
        ));
        assert_eq!(apl_null_model(&g, &[0, 1], 0, 0), Err(AnalyzeError::NoTrials));
    }

    #[test]
    fn p_value_is_a_trial_fraction() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let r = apl_null_model(&g, &[1, 2], 97, 11).unwrap();
        let frac = r.p_value * 97.0;
        assert!((frac - frac.round()).abs() < 1e-9);
        let again = apl_null_model(&g, &[1, 2], 97, 11).unwrap();
        assert_eq!(r, again);
    }
}
