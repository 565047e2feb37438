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

//! Analyses computed on an algorithm similarity network.

mod compare;
mod nullmodel;
mod tables;

pub use compare::{ccdf, weight_correlation};
pub use nullmodel::{apl_null_model, NullModelResult, MAX_RESAMPLES};
pub use tables::{
    feature_table, ground_truth_ranking, stats_table, write_feature_table, write_ranking, write_stats_table,
    FeatureRow, RankRow, RunArchive, StatsRow, STAT_NAMES,
};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algorithms::{run, Builtin, ParamSet, RunError};
use crate::asn::{accumulate, nc_score, AsnError, AsnNet, SimilarityStore};
use crate::graph::{Cover, GraphError, NodeId};
use crate::metrics::{map_codelength, onmi, MetricsError, OnmiVariant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyzeError {
    #[error("no metadata for algorithm `{0}`")]
    MissingMetadata(String),
    #[error("community {0} has no algorithm with recorded runs")]
    EmptyCommunity(usize),
    #[error("network has no ground-truth node")]
    NoGroundTruth,
    #[error("node set of size {size} exceeds the {n} nodes of the network")]
    NodeSetTooLarge { size: usize, n: usize },
    #[error("no trials requested")]
    NoTrials,
    #[error("no connected sample found after {0} draws")]
    ResampleLimit(usize),
    #[error("correlation needs at least two weighted pairs, found {0}")]
    TooFewPairs(usize),
    #[error("correlation undefined: constant weights")]
    ZeroVariance,
    #[error("networks span different node sets")]
    NodeMismatch,
    #[error("subset needs at least two algorithms, found {0}")]
    SubsetTooSmall(usize),
    #[error("algorithm `{0}` absent from every similarity matrix")]
    UnknownAlgorithm(String),
    #[error("network has no edges")]
    NoEdges,
    #[error("no graph archived for network `{0}`")]
    MissingNetwork(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Asn(#[from] AsnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// A cover whose node `i` is the algorithm `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsnCover {
    pub ids: Vec<String>,
    pub cover: Cover,
}

impl AsnCover {
    /// Community members by id, in cover order.
    pub fn communities(&self) -> Vec<Vec<&str>> {
        self.cover
            .communities()
            .iter()
            .map(|c| c.iter().map(|&v| self.ids[v].as_str()).collect())
            .collect()
    }

    /// Cover-file text over algorithm ids, communities sorted.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<Vec<&str>> = self
            .communities()
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        rows.sort();
        let mut out = String::new();
        for row in rows {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Re-expresses the cover over `universe`; ids outside it are
    /// dropped and uncovered ids become singletons.
    fn over(&self, universe: &[String]) -> Cover {
        let index: BTreeMap<&str, NodeId> = universe.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let comms = self
            .communities()
            .into_iter()
            .map(|c| c.into_iter().filter_map(|id| index.get(id).copied()).collect())
            .collect();
        Cover::new(universe.len(), comms).expect("indices within universe")
    }
}

/// Outcome of clustering the network, with codelengths in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct AsnClustering {
    pub communities: AsnCover,
    pub codelength_singletons: f64,
    pub codelength_one_module: f64,
    pub codelength_found: f64,
}

/// Clusters the weighted network with a built-in detector and scores the
/// result with the map equation.
pub fn cluster_asn(net: &AsnNet, clusterer: Builtin, seed: u64) -> Result<AsnClustering, AnalyzeError> {
    let (graph, ids) = net.to_graph()?;
    if graph.edge_count() == 0 {
        return Err(AnalyzeError::NoEdges);
    }
    let cover = run(clusterer, &graph, &ParamSet::new(), seed)?;
    let n = graph.node_count();
    let codelength_found = match cover.is_partition() {
        true => map_codelength(&graph, &cover)?,
        false => f64::NAN,
    };
    Ok(AsnClustering {
        codelength_singletons: map_codelength(&graph, &Cover::singletons(n))?,
        codelength_one_module: map_codelength(&graph, &Cover::whole(n))?,
        codelength_found,
        communities: AsnCover { ids, cover },
    })
}

/// oNMI MAX between two clusterings of the same algorithms, aligned by id.
pub fn partition_agreement(a: &AsnCover, b: &AsnCover) -> Result<f64, AnalyzeError> {
    let universe: Vec<String> = a
        .ids
        .iter()
        .chain(&b.ids)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(onmi(&a.over(&universe), &b.over(&universe), OnmiVariant::Max)?)
}

/// Rebuilds the network from the similarities among `subset` only, then
/// scores it. The caller chooses the backbone threshold.
pub fn sub_asn(store: &SimilarityStore, subset: &[String], k: usize) -> Result<AsnNet, AnalyzeError> {
    let keep: BTreeSet<String> = subset.iter().cloned().collect();
    if keep.len() < 2 {
        return Err(AnalyzeError::SubsetTooSmall(keep.len()));
    }
    let known: BTreeSet<String> = store.algorithms().into_iter().collect();
    if let Some(missing) = keep.iter().find(|id| !known.contains(*id)) {
        return Err(AnalyzeError::UnknownAlgorithm(missing.clone()));
    }
    let mut restricted = SimilarityStore::new();
    for (network, matrix) in store.iter() {
        restricted.insert(network, matrix.restrict(&keep));
    }
    let net = accumulate(&restricted, k);
    Ok(nc_score(&net)?)
}
