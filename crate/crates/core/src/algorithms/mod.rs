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

//! Community detectors: the built-in suite, external commands, and
//! modularity-driven parameter selection.
//!
//! Every built-in is a pure function of `(graph, params, seed)`.

mod cnm;
mod external;
mod girvan_newman;
mod grid;
mod hlc;
mod kclique;
mod labelprop;
mod levels;
mod nsim;
mod registry;
mod walktrap;

pub use external::{expand_template, run_external};
pub use grid::{grid_search, grid_search_with, GridOutcome};
pub use registry::{
    default_registry, parse_registry, write_registry, AlgorithmKind, AlgorithmSpec, CategoryFlags, ParamGrid, Registry,
    RegistryError, DEFAULT_TIMEOUT, GT_CLONE_ID,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Cover, Graph};

/// One point of a parameter grid, keyed by parameter name.
pub type ParamSet = BTreeMap<String, f64>;

pub(crate) const SWEEP_CAP: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("unknown built-in algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("parameter `{param}` = {value} outside its domain: {domain}")]
    ParamOutOfDomain {
        param: String,
        value: f64,
        domain: &'static str,
    },
    #[error("algorithm `{algorithm}` takes no parameter `{param}`")]
    UnknownParam { algorithm: String, param: String },
    #[error("no convergence after {0} sweeps")]
    NonConvergence(usize),
    #[error("external command failed: {0}")]
    ExternalFailed(String),
    #[error("external command exceeded its {0:?} timeout")]
    Timeout(Duration),
    #[error("unparseable detector output: {0}")]
    BadOutput(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("every grid point failed")]
    AllGridPointsFailed,
    /// A failure read back from the result cache, message preserved.
    #[error("{0}")]
    Replayed(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Builtin {
    LabelProp,
    Slpa,
    Louvain,
    Cnm,
    GirvanNewman,
    Walktrap,
    KClique,
    Hlc,
    NsimAggl,
    Infomap2l,
}

impl Builtin {
    pub const ALL: [Builtin; 10] = [
        Builtin::LabelProp,
        Builtin::Slpa,
        Builtin::Louvain,
        Builtin::Cnm,
        Builtin::GirvanNewman,
        Builtin::Walktrap,
        Builtin::KClique,
        Builtin::Hlc,
        Builtin::NsimAggl,
        Builtin::Infomap2l,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::LabelProp => "labelprop",
            Builtin::Slpa => "slpa",
            Builtin::Louvain => "louvain",
            Builtin::Cnm => "cnm",
            Builtin::GirvanNewman => "girvan_newman",
            Builtin::Walktrap => "walktrap",
            Builtin::KClique => "kclique",
            Builtin::Hlc => "hlc",
            Builtin::NsimAggl => "nsim_aggl",
            Builtin::Infomap2l => "infomap_2l",
        }
    }

    /// Default parameter grid.
    pub fn default_grid(self) -> ParamGrid {
        let grid = |name: &str, values: &[f64]| {
            ParamGrid::new([(name.to_string(), values.to_vec())].into_iter().collect()).expect("non-empty")
        };
        match self {
            Builtin::Slpa => grid("r", &[0.1, 0.2, 0.3, 0.4, 0.5]),
            Builtin::KClique => grid("k", &[3.0, 4.0, 5.0]),
            Builtin::Walktrap => grid("t", &[2.0, 4.0]),
            Builtin::NsimAggl => grid("cut_level", &[0.0, 1.0, 2.0, 3.0, 4.0]),
            _ => ParamGrid::singleton(),
        }
    }

    /// Category flags of the classical method.
    pub fn flags(self) -> CategoryFlags {
        let f = |overlapping, spreading, modularity_based, nsim| CategoryFlags {
            overlapping,
            spreading,
            modularity_based,
            nsim,
        };
        match self {
            Builtin::LabelProp => f(false, true, false, false),
            Builtin::Slpa => f(true, true, false, false),
            Builtin::Louvain | Builtin::Cnm => f(false, false, true, false),
            Builtin::GirvanNewman | Builtin::Walktrap | Builtin::Infomap2l => f(false, true, false, false),
            Builtin::KClique => f(true, false, false, false),
            Builtin::Hlc => f(true, false, false, true),
            Builtin::NsimAggl => f(false, false, false, true),
        }
    }

    /// Whether the method always returns disjoint partitions.
    pub fn is_partitioning(self) -> bool {
        !matches!(self, Builtin::Slpa | Builtin::KClique | Builtin::Hlc)
    }

    fn accepted_params(self) -> &'static [&'static str] {
        match self {
            Builtin::Slpa => &["r", "iterations"],
            Builtin::KClique => &["k"],
            Builtin::Walktrap => &["t"],
            Builtin::NsimAggl => &["cut", "cut_level"],
            _ => &[],
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| RunError::UnknownAlgorithm(s.to_string()))
    }
}

pub(crate) fn int_param(
    params: &ParamSet,
    name: &str,
    default: usize,
    min: usize,
    domain: &'static str,
) -> Result<usize, RunError> {
    match params.get(name) {
        None => Ok(default),
        Some(&v) if v.fract() == 0.0 && v >= min as f64 && v < 1e9 => Ok(v as usize),
        Some(&v) => Err(RunError::ParamOutOfDomain {
            param: name.to_string(),
            value: v,
            domain,
        }),
    }
}

/// Runs a built-in detector by name.
pub fn run_builtin(id: &str, graph: &Graph, params: &ParamSet, seed: u64) -> Result<Cover, RunError> {
    run(id.parse()?, graph, params, seed)
}

pub fn run(algo: Builtin, graph: &Graph, params: &ParamSet, seed: u64) -> Result<Cover, RunError> {
    if let Some(bad) = params.keys().find(|k| !algo.accepted_params().contains(&k.as_str())) {
        return Err(RunError::UnknownParam {
            algorithm: algo.name().to_string(),
            param: bad.clone(),
        });
    }
    match algo {
        Builtin::LabelProp => labelprop::label_propagation(graph, seed),
        Builtin::Slpa => {
            let r = match params.get("r") {
                None => 0.3,
                Some(&r) if r > 0.0 && r <= 1.0 => r,
                Some(&r) => {
                    return Err(RunError::ParamOutOfDomain {
                        param: "r".into(),
                        value: r,
                        domain: "0 < r <= 1",
                    })
                }
            };
            let t = int_param(params, "iterations", SWEEP_CAP, 1, "integer >= 1")?;
            Ok(labelprop::slpa(graph, r, t, seed))
        }
        Builtin::Louvain => Ok(levels::louvain(graph, seed)),
        Builtin::Infomap2l => Ok(levels::infomap(graph, seed)),
        Builtin::Cnm => Ok(cnm::cnm(graph)),
        Builtin::GirvanNewman => Ok(girvan_newman::girvan_newman(graph)),
        Builtin::Walktrap => {
            let t = int_param(params, "t", 4, 1, "integer >= 1")?;
            Ok(walktrap::walktrap(graph, t))
        }
        Builtin::KClique => {
            let k = int_param(params, "k", 3, 2, "integer >= 2")?;
            Ok(kclique::clique_percolation(graph, k))
        }
        Builtin::Hlc => Ok(hlc::link_communities(graph)),
        Builtin::NsimAggl => {
            let clusters = match (params.get("cut"), params.get("cut_level")) {
                (Some(_), _) => int_param(params, "cut", 2, 1, "integer >= 1")?,
                (None, Some(_)) => {
                    let level = int_param(params, "cut_level", 0, 0, "integer in 0..=4")?;
                    if level > 4 {
                        return Err(RunError::ParamOutOfDomain {
                            param: "cut_level".into(),
                            value: level as f64,
                            domain: "integer in 0..=4",
                        });
                    }
                    nsim::cut_for_level(graph.node_count(), level)
                }
                (None, None) => nsim::cut_for_level(graph.node_count(), 0),
            };
            Ok(nsim::neighborhood_agglomeration(graph, clusters))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
    Timeout,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
            RunStatus::Timeout => "timeout",
        }
    }
}

/// One detector execution on one network. `status == Ok` exactly when a
/// cover is present.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: String,
    pub network: String,
    pub params: ParamSet,
    pub cover: Option<Arc<Cover>>,
    pub seconds: f64,
    pub status: RunStatus,
    pub detail: String,
}

impl RunRecord {
    pub fn ok(algorithm: &str, network: &str, params: ParamSet, cover: Cover, seconds: f64) -> Self {
        RunRecord {
            algorithm: algorithm.to_string(),
            network: network.to_string(),
            params,
            cover: Some(Arc::new(cover)),
            seconds,
            status: RunStatus::Ok,
            detail: String::new(),
        }
    }

    pub fn failed(algorithm: &str, network: &str, error: &RunError, seconds: f64) -> Self {
        RunRecord {
            algorithm: algorithm.to_string(),
            network: network.to_string(),
            params: ParamSet::new(),
            cover: None,
            seconds,
            status: if matches!(error, RunError::Timeout(_)) {
                RunStatus::Timeout
            } else {
                RunStatus::Failed
            },
            detail: error.to_string(),
        }
    }
}

/// Canonical `k=v,k=v` rendering of a parameter set, keys sorted.
pub fn format_params(params: &ParamSet) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_cliques_bridge() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap()
    }

    fn two_disjoint_k4() -> Graph {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
        }
        Graph::from_edges(8, edges).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!(matches!(
            run_builtin("nope", &Graph::empty(1), &ParamSet::new(), 0),
            Err(RunError::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn param_domains() {
        let g = two_cliques_bridge();
        let p = |k: &str, v: f64| -> ParamSet { [(k.to_string(), v)].into_iter().collect() };
        assert!(matches!(
            run(Builtin::Slpa, &g, &p("r", 0.0), 0),
            Err(RunError::ParamOutOfDomain { .. })
        ));
        assert!(matches!(
            run(Builtin::KClique, &g, &p("k", 1.0), 0),
            Err(RunError::ParamOutOfDomain { .. })
        ));
        assert!(matches!(
            run(Builtin::Walktrap, &g, &p("t", 2.5), 0),
            Err(RunError::ParamOutOfDomain { .. })
        ));
        assert!(matches!(
            run(Builtin::NsimAggl, &g, &p("cut_level", 5.0), 0),
            Err(RunError::ParamOutOfDomain { .. })
        ));
        assert!(matches!(
            run(Builtin::Louvain, &g, &p("r", 0.1), 0),
            Err(RunError::UnknownParam { .. })
        ));
    }

    #[test]
    fn every_builtin_returns_valid_deterministic_covers() {
        let g = two_cliques_bridge();
        for b in Builtin::ALL {
            for point in b.default_grid().points() {
                let a = run(b, &g, &point, 17).unwrap();
                let again = run(b, &g, &point, 17).unwrap();
                assert_eq!(a, again, "{b} not deterministic");
                assert_eq!(a.node_count(), 6);
                assert!(a.memberships().iter().all(|&s| s >= 1));
                if b.is_partitioning() {
                    assert!(a.is_partition(), "{b} returned overlap");
                }
            }
        }
    }

    #[test]
    fn no_builtin_merges_disconnected_components() {
        let g = two_disjoint_k4();
        let component = |v: usize| v / 4;
        for b in Builtin::ALL {
            for point in b.default_grid().points() {
                let c = run(b, &g, &point, 3).unwrap();
                for community in c.communities() {
                    let first = component(community[0]);
                    assert!(
                        community.iter().all(|&v| component(v) == first),
                        "{b} {point:?} merged components: {community:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn edgeless_graphs_give_singletons() {
        let g = Graph::empty(5);
        for b in Builtin::ALL {
            let c = run(b, &g, &ParamSet::new(), 1).unwrap();
            assert_eq!(c.canonical(), Cover::singletons(5), "{b}");
        }
    }

    #[test]
    fn params_render_sorted() {
        let p: ParamSet = [("t".to_string(), 2.0), ("k".to_string(), 0.5)].into_iter().collect();
        assert_eq!(format_params(&p), "k=0.5,t=2");
    }
}
