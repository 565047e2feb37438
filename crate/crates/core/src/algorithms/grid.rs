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

//! Parameter selection by maximum modularity.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use super::{run, run_external, AlgorithmKind, AlgorithmSpec, ParamSet, RunError};
use crate::graph::{Cover, Graph};
use crate::metrics::quality;

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub params: ParamSet,
    pub cover: Cover,
    /// Newman modularity for partitions, overlapping modularity otherwise.
    pub score: f64,
    pub failures: Vec<(ParamSet, RunError)>,
}

fn compare_points(a: &ParamSet, b: &ParamSet) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|((ka, va), (kb, vb))| ka.cmp(kb).then(va.total_cmp(vb)))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Runs every grid point through `runner` and keeps the best-scoring cover.
/// Equal scores keep the lexicographically smallest parameter tuple.
pub fn grid_search_with<F>(spec: &AlgorithmSpec, graph: &Graph, mut runner: F) -> Result<GridOutcome, RunError>
where
    F: FnMut(&ParamSet) -> Result<Cover, RunError>,
{
    let mut points = spec.param_grid.points();
    points.sort_by(compare_points);
    let mut best: Option<(ParamSet, Cover, f64)> = None;
    let mut failures = Vec::new();
    let mut last_error = None;
    for point in points {
        match runner(&point) {
            Ok(cover) => {
                let score = quality(graph, &cover);
                if best.as_ref().is_none_or(|b| score > b.2) {
                    best = Some((point, cover, score));
                }
            }
            Err(e) => {
                last_error = Some(e.clone());
                failures.push((point, e));
            }
        }
    }
    match best {
        Some((params, cover, score)) => Ok(GridOutcome {
            params,
            cover,
            score,
            failures,
        }),
        None if failures.len() == 1 => Err(last_error.expect("one failure")),
        None => Err(RunError::AllGridPointsFailed),
    }
}

static SCRATCH: AtomicU64 = AtomicU64::new(0);

/// Grid search with the registry entry's own runner. External commands
/// run in a scratch directory under the system temp dir.
pub fn grid_search(spec: &AlgorithmSpec, graph: &Graph, seed: u64) -> Result<GridOutcome, RunError> {
    match spec.kind {
        AlgorithmKind::Builtin(algo) => grid_search_with(spec, graph, |p| run(algo, graph, p, seed)),
        AlgorithmKind::External => {
            let dir = std::env::temp_dir().join(format!(
                "asnkit-{}-{}",
                std::process::id(),
                SCRATCH.fetch_add(1, AtomicOrdering::Relaxed)
            ));
            let out = grid_search_with(spec, graph, |p| run_external(spec, graph, p, &dir, seed, None));
            let _ = std::fs::remove_dir_all(&dir);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Builtin, ParamGrid};
    use super::*;
    use crate::metrics::{lazar_modularity, modularity};
    use std::collections::BTreeMap;

    fn grid(name: &str, values: &[f64]) -> ParamGrid {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), values.to_vec());
        ParamGrid::new(m).unwrap()
    }

    fn two_cliques_bridge() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap()
    }

    #[test]
    fn singleton_grid_returns_its_point() {
        let g = two_cliques_bridge();
        let spec = AlgorithmSpec::builtin("louvain", Builtin::Louvain, ParamGrid::singleton());
        let out = grid_search(&spec, &g, 0).unwrap();
        assert!(out.params.is_empty());
        assert!((out.score - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn higher_modularity_point_wins() {
        let g = two_cliques_bridge();
        let low = Cover::from_labels(&[0, 0, 1, 1, 1, 1]);
        let high = Cover::from_labels(&[0, 0, 0, 1, 1, 1]);
        let (ql, qh) = (modularity(&g, &low).unwrap(), modularity(&g, &high).unwrap());
        assert!(ql < qh);
        let spec = AlgorithmSpec::builtin("x", Builtin::Louvain, grid("p", &[1.0, 2.0]));
        let out = grid_search_with(&spec, &g, |p| {
            Ok(if p["p"] == 1.0 { low.clone() } else { high.clone() })
        })
        .unwrap();
        assert_eq!(out.params["p"], 2.0);
        assert_eq!(out.score, qh);
    }

    #[test]
    fn ties_keep_smallest_tuple() {
        let g = two_cliques_bridge();
        let spec = AlgorithmSpec::builtin("x", Builtin::Louvain, grid("p", &[3.0, 1.0, 2.0]));
        let out = grid_search_with(&spec, &g, |_| Ok(Cover::whole(6))).unwrap();
        assert_eq!(out.params["p"], 1.0);
    }

    #[test]
    fn overlapping_output_scored_by_overlapping_modularity() {
        let g = two_cliques_bridge();
        let cover = Cover::new(6, vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5]]).unwrap();
        let spec = AlgorithmSpec::builtin("x", Builtin::KClique, ParamGrid::singleton());
        let out = grid_search_with(&spec, &g, |_| Ok(cover.clone())).unwrap();
        assert_eq!(out.score, lazar_modularity(&g, &cover));
    }

    #[test]
    fn failures_are_collected() {
        let g = two_cliques_bridge();
        let spec = AlgorithmSpec::builtin("x", Builtin::Louvain, grid("p", &[1.0, 2.0]));
        let out = grid_search_with(&spec, &g, |p| {
            if p["p"] == 1.0 {
                Err(RunError::NonConvergence(100))
            } else {
                Ok(Cover::whole(6))
            }
        })
        .unwrap();
        assert_eq!(out.failures.len(), 1);
        let none = grid_search_with(&spec, &g, |_| Err(RunError::NonConvergence(100)));
        assert_eq!(none.unwrap_err(), RunError::AllGridPointsFailed);
    }
}
