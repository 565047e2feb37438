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

//! The algorithm similarity network: construction from per-network
//! similarity matrices and noise-corrected backboning.

mod backbone;
mod build;
mod similarity;

pub use backbone::{backbone, nc_score, select_delta, VARIANCE_PRIOR};
pub use build::{accumulate, aggregate_average, aggregate_threshold, mutual_topk, DEFAULT_TOP_K};
pub use similarity::{SimilarityMatrix, SimilarityStore};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::metrics::MetricsError;

/// Id of the pseudo-algorithm whose output is the planted ground truth.
pub const GROUND_TRUTH_ID: &str = "ground_truth";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsnError {
    #[error("invalid similarity matrix: {0}")]
    InvalidMatrix(String),
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("total edge weight is zero")]
    ZeroWeight,
    #[error("node `{0}` has no incident edge")]
    IsolatedNode(String),
    #[error("edge {0}-{1} has no significance score")]
    MissingScore(String, String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Metrics(MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsnEdge {
    pub weight: f64,
    pub score: Option<f64>,
}

/// Undirected weighted network over algorithm ids. Pairs are stored once
/// with the smaller id first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AsnNet {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), AsnEdge>,
    delta: Option<f64>,
}

pub(crate) fn pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl AsnNet {
    pub fn new<I, S>(nodes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AsnNet {
            nodes: nodes.into_iter().map(Into::into).collect(),
            ..AsnNet::default()
        }
    }

    pub fn add_node(&mut self, id: &str) {
        self.nodes.insert(id.to_string());
    }

    /// Sets the weight of `a`-`b`, adding both nodes. Self-pairs are ignored.
    pub fn set_weight(&mut self, a: &str, b: &str, weight: f64) {
        if a == b {
            return;
        }
        self.add_node(a);
        self.add_node(b);
        self.edges.insert(pair(a, b), AsnEdge { weight, score: None });
    }

    pub fn add_weight(&mut self, a: &str, b: &str, weight: f64) {
        let w = self.weight(a, b) + weight;
        self.set_weight(a, b, w);
    }

    pub fn set_score(&mut self, a: &str, b: &str, score: f64) {
        if let Some(e) = self.edges.get_mut(&pair(a, b)) {
            e.score = Some(score);
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, AsnEdge)> {
        self.edges.iter().map(|((a, b), e)| (a.as_str(), b.as_str(), *e))
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<AsnEdge> {
        self.edges.get(&pair(a, b)).copied()
    }

    pub fn weight(&self, a: &str, b: &str) -> f64 {
        self.edge(a, b).map_or(0.0, |e| e.weight)
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().map(|e| e.weight).sum()
    }

    pub fn strengths(&self) -> BTreeMap<&str, f64> {
        let mut s: BTreeMap<&str, f64> = self.nodes().map(|v| (v, 0.0)).collect();
        for (a, b, e) in self.edges() {
            *s.get_mut(a).expect("endpoint is a node") += e.weight;
            *s.get_mut(b).expect("endpoint is a node") += e.weight;
        }
        s
    }

    pub fn degrees(&self) -> BTreeMap<&str, usize> {
        let mut d: BTreeMap<&str, usize> = self.nodes().map(|v| (v, 0)).collect();
        for (a, b, _) in self.edges() {
            *d.get_mut(a).expect("endpoint is a node") += 1;
            *d.get_mut(b).expect("endpoint is a node") += 1;
        }
        d
    }

    pub fn isolated(&self) -> Vec<String> {
        self.degrees()
            .into_iter()
            .filter(|&(_, d)| d == 0)
            .map(|(v, _)| v.to_string())
            .collect()
    }

    /// The network without nodes lacking incident edges.
    pub fn without_isolated(&self) -> AsnNet {
        let isolated: BTreeSet<String> = self.isolated().into_iter().collect();
        AsnNet {
            nodes: self.nodes.difference(&isolated).cloned().collect(),
            edges: self.edges.clone(),
            delta: self.delta,
        }
    }

    /// Share of node pairs joined by an edge.
    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1.0) / 2.0)
    }

    /// The induced network on `keep`.
    pub fn induced(&self, keep: &BTreeSet<String>) -> AsnNet {
        AsnNet {
            nodes: self.nodes.intersection(keep).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
                .map(|(k, e)| (k.clone(), *e))
                .collect(),
            delta: self.delta,
        }
    }

    /// Dense graph view with nodes in id order.
    pub fn to_graph(&self) -> Result<(Graph, Vec<String>), GraphError> {
        let ids: Vec<String> = self.nodes.iter().cloned().collect();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let edges = self
            .edges()
            .filter(|(_, _, e)| e.weight > 0.0)
            .map(|(a, b, e)| (index[a], index[b], e.weight));
        Ok((Graph::from_weighted_edges(ids.len(), edges)?, ids))
    }

    /// `src_id,dst_id,weight,nc_score`, one row per edge; a missing score
    /// is an empty cell.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["src_id", "dst_id", "weight", "nc_score"])
            .expect("in-memory write");
        for (a, b, e) in self.edges() {
            let score = e.score.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([a, b, &e.weight.to_string(), &score])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<AsnNet, AsnError> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r.headers().map_err(|e| AsnError::Csv(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["src_id", "dst_id", "weight", "nc_score"] {
            return Err(AsnError::Csv("header must be src_id,dst_id,weight,nc_score".into()));
        }
        let mut net = AsnNet::default();
        for (i, record) in r.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| AsnError::Csv(e.to_string()))?;
            let (a, b) = (&record[0], &record[1]);
            if a.is_empty() || b.is_empty() || a == b {
                return Err(AsnError::Csv(format!("line {line}: invalid node pair")));
            }
            let weight: f64 = record[2]
                .trim()
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| AsnError::Csv(format!("line {line}: invalid weight")))?;
            if net.edge(a, b).is_some() {
                return Err(AsnError::Csv(format!("line {line}: duplicate edge {a}-{b}")));
            }
            net.set_weight(a, b, weight);
            let cell = record[3].trim();
            if !cell.is_empty() {
                let s: f64 = cell
                    .parse()
                    .ok()
                    .filter(|s: &f64| !s.is_nan())
                    .ok_or_else(|| AsnError::Csv(format!("line {line}: invalid score")))?;
                net.set_score(a, b, s);
            }
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_unordered() {
        let mut net = AsnNet::new(["c"]);
        net.add_weight("b", "a", 2.0);
        net.add_weight("a", "b", 1.0);
        assert_eq!(net.weight("b", "a"), 3.0);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.isolated(), vec!["c".to_string()]);
        assert_eq!(net.without_isolated().node_count(), 2);
        assert_eq!(net.strengths()["a"], 3.0);
    }

    #[test]
    fn csv_round_trip_keeps_scores() {
        let mut net = AsnNet::default();
        net.set_weight("louvain", "cnm", 12.0);
        net.set_weight("cnm", "hlc", 0.5);
        net.set_score("cnm", "louvain", -1.25);
        let text = net.to_csv();
        assert!(text.starts_with("src_id,dst_id,weight,nc_score\n"));
        assert_eq!(AsnNet::from_csv(text.as_bytes()).unwrap(), net);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let h = "src_id,dst_id,weight,nc_score\n";
        assert!(AsnNet::from_csv(format!("{h}a,a,1,\n").as_bytes()).is_err());
        assert!(AsnNet::from_csv(format!("{h}a,b,-1,\n").as_bytes()).is_err());
        assert!(AsnNet::from_csv(format!("{h}a,b,1,\nb,a,2,\n").as_bytes()).is_err());
        assert!(AsnNet::from_csv(b"a,b,c,d\n").is_err());
    }
}
