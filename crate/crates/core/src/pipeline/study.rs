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

//! Stages three to five: similarity, the algorithm network and its
//! analyses.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{derive_seed, Artifacts, DeltaChoice, Network, PipelineConfig, PipelineError, TaskOutcome};
use crate::algorithms::{Builtin, CategoryFlags, Registry};
use crate::analyze::{
    apl_null_model, ccdf, cluster_asn, feature_table, ground_truth_ranking, partition_agreement, stats_table, sub_asn,
    weight_correlation, write_feature_table, write_ranking, write_stats_table, AsnClustering, RankRow, RunArchive,
};
use crate::asn::{
    accumulate, aggregate_average, aggregate_threshold, backbone, nc_score, select_delta, AsnNet, SimilarityMatrix,
    SimilarityStore, GROUND_TRUTH_ID,
};
use crate::graph::Cover;
use crate::metrics::{transitivity, OnmiVariant};

/// Headline numbers of the backboned network.
#[derive(Debug, Clone, PartialEq)]
pub struct AsnSummary {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub delta: f64,
    pub dropped: Vec<String>,
    pub transitivity: Option<f64>,
    pub communities: Option<usize>,
    pub codelength_singletons: Option<f64>,
    pub codelength_one_module: Option<f64>,
    pub codelength_found: Option<f64>,
}

pub(crate) struct Study<'a> {
    config: &'a PipelineConfig,
    registry: &'a Registry,
    networks: &'a [Network],
    outcomes: &'a [TaskOutcome],
    /// One store per variant, in `OnmiVariant::ALL` order.
    stores: Vec<SimilarityStore>,
    gt_store: SimilarityStore,
    scored: Option<AsnNet>,
    backboned: Option<AsnNet>,
    clustering: Option<AsnClustering>,
    ranking: Option<Vec<RankRow>>,
    summary: Option<AsnSummary>,
    notes: BTreeMap<&'static str, Value>,
}

fn variant_index(v: OnmiVariant) -> usize {
    OnmiVariant::ALL.iter().position(|&x| x == v).expect("listed variant")
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Adds the nodes of `other` missing from `net`, so that the two can be
/// compared edge by edge.
fn aligned(net: &AsnNet, other: &AsnNet) -> AsnNet {
    let mut out = net.clone();
    for v in other.nodes() {
        out.add_node(v);
    }
    out
}

/// Scores `net`, backbones it at the automatic threshold and clusters it.
fn cluster_pipeline(net: &AsnNet, clusterer: Builtin, seed: u64) -> Result<AsnClustering, String> {
    let scored = nc_score(&net.without_isolated()).map_err(|e| e.to_string())?;
    let delta = select_delta(&scored).map_err(|e| e.to_string())?;
    let (bb, _) = backbone(&scored, delta).map_err(|e| e.to_string())?;
    cluster_asn(&bb.without_isolated(), clusterer, seed).map_err(|e| e.to_string())
}

impl<'a> Study<'a> {
    pub(crate) fn new(
        config: &'a PipelineConfig,
        registry: &'a Registry,
        networks: &'a [Network],
        outcomes: &'a [TaskOutcome],
    ) -> Self {
        Study {
            config,
            registry,
            networks,
            outcomes,
            stores: Vec::new(),
            gt_store: SimilarityStore::new(),
            scored: None,
            backboned: None,
            clustering: None,
            ranking: None,
            summary: None,
            notes: BTreeMap::new(),
        }
    }

    fn main_store(&self) -> &SimilarityStore {
        &self.stores[variant_index(self.config.variant)]
    }

    fn seed(&self, purpose: &str) -> u64 {
        derive_seed(self.config.seed, purpose, "asn")
    }

    pub(crate) fn similarity(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "similarity";
        let mut covers: BTreeMap<&str, Vec<(String, &Cover)>> = BTreeMap::new();
        for o in self.outcomes {
            if let Some(c) = &o.record.cover {
                covers
                    .entry(o.record.network.as_str())
                    .or_default()
                    .push((o.record.algorithm.clone(), c.as_ref()));
            }
        }
        let empty = Vec::new();
        let matrices: Vec<(Vec<SimilarityMatrix>, Option<SimilarityMatrix>)> = self
            .networks
            .par_iter()
            .map(|net| {
                let list = covers.get(net.id.as_str()).unwrap_or(&empty);
                let per_variant = OnmiVariant::ALL
                    .iter()
                    .map(|&v| SimilarityMatrix::from_covers(list, v))
                    .collect::<Result<Vec<_>, _>>()?;
                let with_gt = match &net.ground_truth {
                    Some(gt) => {
                        let mut l = list.clone();
                        l.push((GROUND_TRUTH_ID.to_string(), gt.as_ref()));
                        Some(SimilarityMatrix::from_covers(&l, self.config.variant)?)
                    }
                    None => None,
                };
                Ok((per_variant, with_gt))
            })
            .collect::<Result<_, crate::asn::AsnError>>()
            .map_err(|e| PipelineError::stage(STAGE, e))?;
        self.stores = vec![SimilarityStore::new(); OnmiVariant::ALL.len()];
        for (net, (per_variant, with_gt)) in self.networks.iter().zip(matrices) {
            for (i, m) in per_variant.into_iter().enumerate() {
                let dir = OnmiVariant::ALL[i].as_str().to_ascii_lowercase();
                art.write(STAGE, &format!("similarity/{dir}/{}.csv", net.id), m.to_csv())?;
                self.stores[i].insert(&net.id, m);
            }
            if let Some(m) = with_gt {
                art.write(STAGE, &format!("similarity_gt/{}.csv", net.id), m.to_csv())?;
                self.gt_store.insert(&net.id, m);
            }
        }
        self.notes.insert(
            "similarity",
            json!({"variant": self.config.variant.as_str(), "networks": self.main_store().len(), "with_ground_truth": self.gt_store.len()}),
        );
        Ok(())
    }

    pub(crate) fn ranking(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "ground-truth";
        if self.gt_store.is_empty() {
            self.notes
                .insert("ground_truth", json!({"note": "no synthetic networks"}));
            return Ok(());
        }
        let net = accumulate(&self.gt_store, self.config.k);
        let rows = ground_truth_ranking(&net).map_err(|e| PipelineError::stage(STAGE, e))?;
        art.write(STAGE, "gt_ranking.csv", write_ranking(&rows))?;
        let note = match rows.is_empty() {
            true => json!({"ranked": 0, "note": "every algorithm has zero weight to the ground truth"}),
            false => json!({"ranked": rows.len(), "benchmarks": self.gt_store.len()}),
        };
        self.notes.insert("ground_truth", note);
        self.ranking = Some(rows);
        Ok(())
    }

    pub(crate) fn asn(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "asn";
        let raw = accumulate(self.main_store(), self.config.k);
        let dropped = raw.isolated();
        let scored = nc_score(&raw.without_isolated()).map_err(|e| PipelineError::stage(STAGE, e))?;
        art.write(STAGE, "asn.csv", scored.to_csv())?;
        let weights: Vec<f64> = raw.edges().map(|e| e.2.weight).filter(|&w| w > 0.0).collect();
        art.write(
            STAGE,
            "ccdf.csv",
            csv_rows(
                &["weight", "ccdf"],
                ccdf(&weights)
                    .into_iter()
                    .map(|(w, p)| vec![w.to_string(), p.to_string()]),
            ),
        )?;
        self.notes.insert(
            "asn",
            json!({"k": self.config.k, "nodes": scored.node_count(), "edges": scored.edge_count(), "dropped_isolated": dropped}),
        );
        self.summary = Some(AsnSummary {
            nodes: scored.node_count(),
            edges: scored.edge_count(),
            density: scored.density(),
            delta: f64::NAN,
            dropped,
            transitivity: None,
            communities: None,
            codelength_singletons: None,
            codelength_one_module: None,
            codelength_found: None,
        });
        self.scored = Some(scored);
        Ok(())
    }

    pub(crate) fn backbone(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "backbone";
        let scored = self.scored.as_ref().expect("asn stage ran");
        let delta = match self.config.delta {
            DeltaChoice::Auto => select_delta(scored).map_err(|e| PipelineError::stage(STAGE, e))?,
            DeltaChoice::Fixed(d) => d,
        };
        let (bb, isolated) = backbone(scored, delta).map_err(|e| PipelineError::stage(STAGE, e))?;
        art.write(STAGE, "asn_backbone.csv", bb.to_csv())?;
        let t = bb.to_graph().ok().map(|(g, _)| transitivity(&g));
        self.notes.insert(
            "backbone",
            json!({
                "delta": delta,
                "delta_choice": self.config.delta.to_string(),
                "nodes": bb.node_count(),
                "edges": bb.edge_count(),
                "density": bb.density(),
                "transitivity": t,
                "isolated": isolated,
            }),
        );
        let s = self.summary.as_mut().expect("asn stage ran");
        s.nodes = bb.node_count();
        s.edges = bb.edge_count();
        s.density = bb.density();
        s.delta = delta;
        s.transitivity = t;
        self.backboned = Some(bb);
        Ok(())
    }

    fn metadata(&self) -> BTreeMap<String, CategoryFlags> {
        self.registry
            .entries()
            .iter()
            .map(|s| (s.id.clone(), s.flags))
            .collect()
    }

    pub(crate) fn suite(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "analysis";
        let stage = |e: crate::analyze::AnalyzeError| PipelineError::stage(STAGE, e);
        let bb = self.backboned.as_ref().expect("backbone stage ran").without_isolated();
        let clustering = cluster_asn(&bb, self.config.clusterer, self.seed("cluster")).map_err(stage)?;
        art.write(STAGE, "asn_communities.cover", clustering.communities.to_text())?;
        match cluster_asn(&bb, Builtin::Slpa, self.seed("cluster-overlap")) {
            Ok(o) => art.write(STAGE, "asn_communities_overlap.cover", o.communities.to_text())?,
            Err(e) => art.log_error(json!({"stage": STAGE, "error": format!("overlapping clustering: {e}")})),
        }
        let rows = feature_table(&clustering.communities, &self.metadata()).map_err(stage)?;
        art.write(STAGE, "feature_table.csv", write_feature_table(&rows))?;

        let archive = RunArchive {
            graphs: self
                .networks
                .iter()
                .map(|n| (n.id.clone(), Arc::clone(&n.graph)))
                .collect(),
            runs: self
                .outcomes
                .iter()
                .filter_map(|o| {
                    o.record
                        .cover
                        .as_ref()
                        .map(|c| (o.record.algorithm.clone(), o.record.network.clone(), Arc::clone(c)))
                })
                .collect(),
        };
        let stats = stats_table(&clustering.communities, &archive).map_err(stage)?;
        art.write(STAGE, "stats_table.csv", write_stats_table(&stats))?;

        self.sub_asn_overlapping(art)?;

        let nan_free = |x: f64| (!x.is_nan()).then_some(x);
        self.notes.insert(
            "clustering",
            json!({
                "clusterer": self.config.clusterer.name(),
                "communities": clustering.communities.cover.communities().len(),
                "codelength_singletons": clustering.codelength_singletons,
                "codelength_one_module": clustering.codelength_one_module,
                "codelength_found": nan_free(clustering.codelength_found),
            }),
        );
        let s = self.summary.as_mut().expect("asn stage ran");
        s.communities = Some(clustering.communities.cover.communities().len());
        s.codelength_singletons = Some(clustering.codelength_singletons);
        s.codelength_one_module = Some(clustering.codelength_one_module);
        s.codelength_found = nan_free(clustering.codelength_found);
        self.clustering = Some(clustering);
        Ok(())
    }

    /// The network rebuilt from overlapping algorithms alone.
    fn sub_asn_overlapping(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "analysis";
        let present: BTreeSet<String> = self.main_store().algorithms().into_iter().collect();
        let subset: Vec<String> = self
            .registry
            .entries()
            .iter()
            .filter(|s| s.flags.overlapping && present.contains(&s.id))
            .map(|s| s.id.clone())
            .collect();
        let built = sub_asn(self.main_store(), &subset, self.config.k)
            .map_err(|e| e.to_string())
            .and_then(|net| {
                let scored = nc_score(&net.without_isolated()).map_err(|e| e.to_string())?;
                let delta = select_delta(&scored).map_err(|e| e.to_string())?;
                backbone(&scored, delta)
                    .map(|b| (b.0, delta))
                    .map_err(|e| e.to_string())
            });
        match built {
            Ok((net, delta)) => {
                art.write(STAGE, "sub_asn_overlapping.csv", net.to_csv())?;
                self.notes.insert(
                    "sub_asn_overlapping",
                    json!({"algorithms": subset, "delta": delta, "edges": net.edge_count()}),
                );
            }
            Err(e) => {
                self.notes
                    .insert("sub_asn_overlapping", json!({"algorithms": subset, "note": e}));
            }
        }
        Ok(())
    }

    pub(crate) fn null_model(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "null-model";
        let Some(ranking) = &self.ranking else {
            self.notes
                .insert("null_model", json!({"note": "no ground-truth ranking"}));
            return Ok(());
        };
        let bb = self.backboned.as_ref().expect("backbone stage ran");
        let (graph, ids) = bb.to_graph().map_err(|e| PipelineError::stage(STAGE, e))?;
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        // Distances are only defined inside one component: use the largest.
        let labels = graph.components();
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &labels {
            *sizes.entry(c).or_default() += 1;
        }
        let largest = sizes
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&c, _)| c);
        let chosen: Vec<&str> = ranking
            .iter()
            .map(|r| r.algorithm.as_str())
            .filter(|a| index.get(a).is_some_and(|&v| Some(labels[v]) == largest))
            .take(self.config.null_size)
            .collect();
        let nodes: Vec<usize> = chosen.iter().map(|a| index[a]).collect();
        if nodes.len() < 2 || nodes.len() >= graph.node_count() {
            self.notes.insert(
                "null_model",
                json!({"note": format!("{} ranked algorithms on a {}-node network; nothing to test", nodes.len(), graph.node_count())}),
            );
            return Ok(());
        }
        let seed = self.seed("null-model");
        match apl_null_model(&graph, &nodes, self.config.null_trials, seed) {
            Ok(r) => {
                let mean = r.samples.iter().sum::<f64>() / r.samples.len() as f64;
                art.write(
                    STAGE,
                    "null_model.csv",
                    csv_rows(
                        &[
                            "observed",
                            "sample_mean",
                            "p_value",
                            "trials",
                            "seed",
                            "resamples",
                            "nodes",
                        ],
                        [vec![
                            r.observed.to_string(),
                            mean.to_string(),
                            r.p_value.to_string(),
                            r.trials.to_string(),
                            r.seed.to_string(),
                            r.resamples.to_string(),
                            chosen.join(" "),
                        ]],
                    ),
                )?;
                art.write(
                    STAGE,
                    "null_model_samples.csv",
                    csv_rows(
                        &["trial", "avg_path_length"],
                        r.samples
                            .iter()
                            .enumerate()
                            .map(|(t, s)| vec![t.to_string(), s.to_string()]),
                    ),
                )?;
                self.notes.insert(
                    "null_model",
                    json!({"observed": r.observed, "p_value": r.p_value, "trials": r.trials, "nodes": chosen}),
                );
            }
            Err(e) => {
                self.notes
                    .insert("null_model", json!({"nodes": chosen, "note": e.to_string()}));
            }
        }
        Ok(())
    }

    pub(crate) fn robustness(&mut self, art: &mut Artifacts) -> Result<(), PipelineError> {
        const STAGE: &str = "robustness";
        let k = self.config.k;
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut push = |name: String, value: Result<f64, String>| {
            let (v, note) = match value {
                Ok(v) => (v.to_string(), String::new()),
                Err(e) => (String::new(), e),
            };
            rows.push(vec![name, v, note]);
        };

        let nets: Vec<AsnNet> = self.stores.iter().map(|s| accumulate(s, k)).collect();
        for i in 0..nets.len() {
            for j in i + 1..nets.len() {
                let name = format!(
                    "weight_correlation_{}_{}",
                    OnmiVariant::ALL[i].as_str().to_ascii_lowercase(),
                    OnmiVariant::ALL[j].as_str().to_ascii_lowercase()
                );
                let (a, b) = (aligned(&nets[i], &nets[j]), aligned(&nets[j], &nets[i]));
                push(name, weight_correlation(&a, &b).map_err(|e| e.to_string()));
            }
        }

        let split = |synthetic: bool| {
            let mut s = SimilarityStore::new();
            for net in self.networks.iter().filter(|n| n.is_synthetic() == synthetic) {
                if let Some(m) = self.main_store().get(&net.id) {
                    s.insert(&net.id, m.clone());
                }
            }
            s
        };
        let (synthetic, real) = (split(true), split(false));
        if !synthetic.is_empty() && !real.is_empty() {
            let (a, b) = (accumulate(&synthetic, k), accumulate(&real, k));
            push(
                "weight_correlation_synthetic_real".into(),
                weight_correlation(&aligned(&a, &b), &aligned(&b, &a)).map_err(|e| e.to_string()),
            );
        }

        let main = match &self.clustering {
            Some(c) => Ok(c.clone()),
            None => {
                let bb = self.backboned.as_ref().expect("backbone stage ran").without_isolated();
                cluster_asn(&bb, self.config.clusterer, self.seed("cluster")).map_err(|e| e.to_string())
            }
        };
        let seed = self.seed("cluster-robustness");
        let average = cluster_pipeline(&aggregate_average(self.main_store()), self.config.clusterer, seed);
        let threshold = aggregate_threshold(self.main_store(), self.config.tau)
            .map_err(|e| e.to_string())
            .and_then(|n| cluster_pipeline(&n, self.config.clusterer, seed));
        for (name, other) in [("agreement_average", average), ("agreement_threshold", threshold)] {
            let value = match (&main, other) {
                (Ok(m), Ok(o)) => partition_agreement(&m.communities, &o.communities).map_err(|e| e.to_string()),
                (Err(e), _) => Err(e.clone()),
                (_, Err(e)) => Err(e),
            };
            push(name.into(), value);
        }
        art.write(
            STAGE,
            "robustness.csv",
            csv_rows(&["comparison", "value", "note"], rows),
        )?;
        self.notes.insert("robustness", json!({"tau": self.config.tau}));
        Ok(())
    }

    pub(crate) fn summaries(&mut self) -> BTreeMap<&'static str, Value> {
        std::mem::take(&mut self.notes)
    }

    pub(crate) fn asn_summary(&self) -> Option<AsnSummary> {
        self.summary.clone()
    }
}
