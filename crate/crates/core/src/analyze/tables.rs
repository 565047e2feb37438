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

//! Per-community reporting tables.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{AnalyzeError, AsnCover};
use crate::algorithms::CategoryFlags;
use crate::asn::{AsnNet, GROUND_TRUTH_ID};
use crate::graph::{Cover, Graph};
use crate::metrics::{conductance, density, ncut, quality};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub community: usize,
    pub size: usize,
    pub overlapping: f64,
    pub spreading: f64,
    pub modularity_based: f64,
    pub nsim: f64,
}

/// Share of each community's algorithms in each category. Algorithms in
/// several communities count in all of them.
pub fn feature_table(
    clustering: &AsnCover,
    metadata: &BTreeMap<String, CategoryFlags>,
) -> Result<Vec<FeatureRow>, AnalyzeError> {
    let mut rows = Vec::new();
    for (c, members) in clustering.communities().into_iter().enumerate() {
        let mut counts = [0usize; 4];
        for id in &members {
            let f = metadata
                .get(*id)
                .ok_or_else(|| AnalyzeError::MissingMetadata(id.to_string()))?;
            for (slot, flag) in counts
                .iter_mut()
                .zip([f.overlapping, f.spreading, f.modularity_based, f.nsim])
            {
                *slot += flag as usize;
            }
        }
        let n = members.len() as f64;
        rows.push(FeatureRow {
            community: c + 1,
            size: members.len(),
            overlapping: counts[0] as f64 / n,
            spreading: counts[1] as f64 / n,
            modularity_based: counts[2] as f64 / n,
            nsim: counts[3] as f64 / n,
        });
    }
    Ok(rows)
}

/// Detector outputs with the networks they were computed on.
#[derive(Debug, Clone, Default)]
pub struct RunArchive {
    pub graphs: BTreeMap<String, Arc<Graph>>,
    /// `(algorithm, network, cover)` for every successful run.
    pub runs: Vec<(String, String, Arc<Cover>)>,
}

/// Column names of the statistics, in row order.
pub const STAT_NAMES: [&str; 6] = [
    "communities",
    "avg_size",
    "density",
    "modularity",
    "conductance",
    "ncut",
];

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub community: usize,
    /// Algorithms of the community that have recorded runs.
    pub algorithms: usize,
    pub means: [f64; 6],
    /// Standard error across algorithms; NaN with a single algorithm.
    pub std_errors: [f64; 6],
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Descriptive statistics of one detector output.
pub(super) fn run_statistics(graph: &Graph, cover: &Cover) -> Result<[f64; 6], AnalyzeError> {
    let comms = cover.communities();
    let mut dens = Vec::with_capacity(comms.len());
    let mut cond = Vec::with_capacity(comms.len());
    let mut cut = Vec::with_capacity(comms.len());
    for c in comms {
        dens.push(density(graph, c)?);
        cond.push(conductance(graph, c)?);
        cut.push(ncut(graph, c)?);
    }
    let sizes: Vec<f64> = comms.iter().map(|c| c.len() as f64).collect();
    Ok([
        comms.len() as f64,
        mean(&sizes),
        mean(&dens),
        quality(graph, cover),
        mean(&cond),
        mean(&cut),
    ])
}

/// Statistics per run, averaged per algorithm, then per community with
/// standard errors across the community's algorithms.
pub fn stats_table(clustering: &AsnCover, archive: &RunArchive) -> Result<Vec<StatsRow>, AnalyzeError> {
    let per_run: Vec<(String, [f64; 6])> = archive
        .runs
        .par_iter()
        .map(|(algorithm, network, cover)| {
            let graph = archive
                .graphs
                .get(network)
                .ok_or_else(|| AnalyzeError::MissingNetwork(network.clone()))?;
            Ok((algorithm.clone(), run_statistics(graph, cover)?))
        })
        .collect::<Result<_, AnalyzeError>>()?;
    let mut by_algorithm: BTreeMap<String, Vec<[f64; 6]>> = BTreeMap::new();
    for (a, s) in per_run {
        by_algorithm.entry(a).or_default().push(s);
    }
    let algorithm_means: BTreeMap<String, [f64; 6]> = by_algorithm
        .into_iter()
        .map(|(a, runs)| {
            let m = std::array::from_fn(|i| mean(&runs.iter().map(|r| r[i]).collect::<Vec<_>>()));
            (a, m)
        })
        .collect();

    let mut rows = Vec::new();
    for (c, members) in clustering.communities().into_iter().enumerate() {
        let values: Vec<&[f64; 6]> = members.iter().filter_map(|id| algorithm_means.get(*id)).collect();
        if values.is_empty() {
            return Err(AnalyzeError::EmptyCommunity(c + 1));
        }
        let k = values.len() as f64;
        let means: [f64; 6] = std::array::from_fn(|i| values.iter().map(|v| v[i]).sum::<f64>() / k);
        let std_errors = std::array::from_fn(|i| {
            if values.len() < 2 {
                return f64::NAN;
            }
            let var = values.iter().map(|v| (v[i] - means[i]).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        });
        rows.push(StatsRow {
            community: c + 1,
            algorithms: values.len(),
            means,
            std_errors,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub rank: usize,
    pub algorithm: String,
    pub weight: f64,
}

/// Algorithms by descending edge weight to the ground-truth node; equal
/// weights share the best rank. Zero weights are left out.
pub fn ground_truth_ranking(net: &AsnNet) -> Result<Vec<RankRow>, AnalyzeError> {
    if !net.nodes().any(|v| v == GROUND_TRUTH_ID) {
        return Err(AnalyzeError::NoGroundTruth);
    }
    let mut scored: Vec<(String, f64)> = net
        .edges()
        .filter(|(_, _, e)| e.weight > 0.0)
        .filter_map(|(a, b, e)| match (a == GROUND_TRUTH_ID, b == GROUND_TRUTH_ID) {
            (true, false) => Some((b.to_string(), e.weight)),
            (false, true) => Some((a.to_string(), e.weight)),
            _ => None,
        })
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    let mut rows: Vec<RankRow> = Vec::with_capacity(scored.len());
    for (i, (algorithm, weight)) in scored.into_iter().enumerate() {
        let rank = match rows.last() {
            Some(prev) if prev.weight == weight => prev.rank,
            _ => i + 1,
        };
        rows.push(RankRow {
            rank,
            algorithm,
            weight,
        });
    }
    Ok(rows)
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn write_feature_table(rows: &[FeatureRow]) -> String {
    csv_text(
        &["ID", "n", "Over", "Spr", "Q", "NSim"],
        rows.iter()
            .map(|r| {
                vec![
                    r.community.to_string(),
                    r.size.to_string(),
                    r.overlapping.to_string(),
                    r.spreading.to_string(),
                    r.modularity_based.to_string(),
                    r.nsim.to_string(),
                ]
            })
            .collect(),
    )
}

pub fn write_stats_table(rows: &[StatsRow]) -> String {
    let mut header = vec!["ID".to_string(), "algorithms".to_string()];
    header.extend(STAT_NAMES.iter().map(|s| format!("mean_{s}")));
    header.extend(STAT_NAMES.iter().map(|s| format!("se_{s}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(
        &header,
        rows.iter()
            .map(|r| {
                let mut row = vec![r.community.to_string(), r.algorithms.to_string()];
                row.extend(r.means.iter().map(f64::to_string));
                row.extend(r.std_errors.iter().map(f64::to_string));
                row
            })
            .collect(),
    )
}

pub fn write_ranking(rows: &[RankRow]) -> String {
    csv_text(
        &["Rank", "Algorithm", "Weight"],
        rows.iter()
            .map(|r| vec![r.rank.to_string(), r.algorithm.clone(), r.weight.to_string()])
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(o: bool, s: bool, q: bool, n: bool) -> CategoryFlags {
        CategoryFlags {
            overlapping: o,
            spreading: s,
            modularity_based: q,
            nsim: n,
        }
    }

    fn clustering(ids: &[&str], comms: Vec<Vec<usize>>) -> AsnCover {
        AsnCover {
            ids: ids.iter().map(|s| s.to_string()).collect(),
            cover: Cover::new(ids.len(), comms).unwrap(),
        }
    }

    #[test]
    fn feature_fractions() {
        let c = clustering(&["a", "b", "c"], vec![vec![0, 1], vec![1, 2]]);
        let meta: BTreeMap<String, CategoryFlags> = [
            ("a".to_string(), flags(true, false, true, false)),
            ("b".to_string(), flags(true, true, false, false)),
            ("c".to_string(), flags(false, false, false, true)),
        ]
        .into_iter()
        .collect();
        let rows = feature_table(&c, &meta).unwrap();
        assert_eq!(rows[0].overlapping, 1.0);
        assert_eq!(rows[0].modularity_based, 0.5);
        assert_eq!(rows[1].nsim, 0.5);
        assert_eq!(rows.iter().map(|r| r.size).sum::<usize>(), 4);
        let mut partial = meta.clone();
        partial.remove("c");
        assert_eq!(
            feature_table(&c, &partial),
            Err(AnalyzeError::MissingMetadata("c".into()))
        );
        assert!(write_feature_table(&rows).starts_with("ID,n,Over,Spr,Q,NSim\n1,2,1,"));
    }

    fn bridge() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap()
    }

    #[test]
    fn run_statistics_of_planted_split() {
        let s = run_statistics(&bridge(), &Cover::from_labels(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert_eq!(s[0], 2.0);
        assert_eq!(s[1], 3.0);
        assert_eq!(s[2], 1.0);
        assert!((s[3] - 5.0 / 14.0).abs() < 1e-12);
        assert!((s[4] - 1.0 / 7.0).abs() < 1e-12);
        assert!((s[5] - 2.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn two_run_hand_average() {
        let g = Arc::new(bridge());
        let split = Arc::new(Cover::from_labels(&[0, 0, 0, 1, 1, 1]));
        let whole = Arc::new(Cover::whole(6));
        let archive = RunArchive {
            graphs: [("g".to_string(), g)].into_iter().collect(),
            runs: vec![
                ("x".into(), "g".into(), split.clone()),
                ("x".into(), "g".into(), whole.clone()),
                ("y".into(), "g".into(), whole),
            ],
        };
        let c = clustering(&["x", "y"], vec![vec![0, 1]]);
        let rows = stats_table(&c, &archive).unwrap();
        // x averages 2 and 1 communities to 1.5; y has 1; community mean 1.25.
        assert_eq!(rows[0].means[0], 1.25);
        // Standard error of {1.5, 1}: sd 0.3536, divided by sqrt 2.
        assert!((rows[0].std_errors[0] - 0.25).abs() < 1e-12);
        let single = clustering(&["x", "y"], vec![vec![0], vec![1]]);
        assert!(stats_table(&single, &archive).unwrap()[0].std_errors[0].is_nan());
        let none = clustering(&["x", "z"], vec![vec![0], vec![1]]);
        assert_eq!(stats_table(&none, &archive), Err(AnalyzeError::EmptyCommunity(2)));
    }

    #[test]
    fn competition_ranking() {
        let mut net = AsnNet::new(["quiet"]);
        for (a, w) in [("a", 5.0), ("b", 7.0), ("c", 5.0), ("d", 1.0), ("e", 0.0)] {
            net.set_weight(GROUND_TRUTH_ID, a, w);
        }
        net.set_weight("a", "b", 100.0);
        let rows = ground_truth_ranking(&net).unwrap();
        let got: Vec<(usize, &str)> = rows.iter().map(|r| (r.rank, r.algorithm.as_str())).collect();
        assert_eq!(got, vec![(1, "b"), (2, "a"), (2, "c"), (4, "d")]);
        assert_eq!(
            ground_truth_ranking(&AsnNet::new(["a"])),
            Err(AnalyzeError::NoGroundTruth)
        );
    }
}
