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

//! Stage one: synthetic benchmarks and ingested real networks.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{content_digest, derive_seed, Artifacts, BenchMode, PipelineConfig, PipelineError};
use crate::graph::{load_graph_with, write_cover, write_graph, write_id_map, Cover, Graph, LoadOptions};
use crate::lfr::{generate_lfr, LfrParams};

const STAGE: &str = "networks";

/// File extensions read from the real-network directory.
const EDGE_LIST_EXTENSIONS: [&str; 3] = ["edges", "txt", "el"];

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkOrigin {
    Synthetic {
        n: usize,
        mu: f64,
        mode: BenchMode,
        repeat: usize,
        seed: u64,
        realized_mu: f64,
    },
    Real {
        file: String,
    },
}

#[derive(Debug, Clone)]
pub struct Network {
    pub id: String,
    pub graph: Arc<Graph>,
    pub ground_truth: Option<Arc<Cover>>,
    /// Hash of the edge list and planted cover; part of every cache key.
    pub digest: String,
    pub origin: NetworkOrigin,
}

impl Network {
    pub fn is_synthetic(&self) -> bool {
        matches!(self.origin, NetworkOrigin::Synthetic { .. })
    }
}

pub fn benchmark_id(n: usize, mu: f64, mode: BenchMode, repeat: usize) -> String {
    format!("lfr-n{n}-mu{mu}-{}-r{repeat:02}", mode.as_str())
}

fn digest_of(graph: &Graph, ground_truth: Option<&Cover>) -> String {
    let mut text = write_graph(graph);
    if let Some(gt) = ground_truth {
        text.push_str("#ground-truth\n");
        text.push_str(&write_cover(gt));
    }
    content_digest(text.as_bytes())
}

fn synthetic(config: &PipelineConfig) -> Result<Vec<Network>, PipelineError> {
    let mut cells = Vec::new();
    for &n in &config.sizes {
        for &mu in &config.mus {
            for &mode in &config.modes {
                for repeat in 0..config.repeats {
                    cells.push((n, mu, mode, repeat));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(n, mu, mode, repeat)| {
            let id = benchmark_id(n, mu, mode, repeat);
            let seed = derive_seed(config.seed, "lfr", &id);
            let params = LfrParams::grid_cell(n, mu, mode == BenchMode::Overlapping, seed);
            let bench = generate_lfr(&params).map_err(|e| PipelineError::stage(STAGE, format!("{id}: {e}")))?;
            Ok(Network {
                digest: digest_of(&bench.graph, Some(&bench.ground_truth)),
                origin: NetworkOrigin::Synthetic {
                    n,
                    mu,
                    mode,
                    repeat,
                    seed,
                    realized_mu: bench.realized_mu,
                },
                graph: Arc::new(bench.graph),
                ground_truth: Some(Arc::new(bench.ground_truth)),
                id,
            })
        })
        .collect()
}

/// Reads every edge list in `dir`, in file-name order. Reciprocal arcs are
/// merged; ids are the file stems prefixed with `real-`.
fn real(dir: &Path) -> Result<Vec<(Network, Option<String>)>, PipelineError> {
    let io = |e: std::io::Error| PipelineError::stage(STAGE, format!("{}: {e}", dir.display()));
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| EDGE_LIST_EXTENSIONS.contains(&x))
        })
        .collect();
    files.sort();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for path in files {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let id = format!(
            "real-{}",
            stem.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                })
                .collect::<String>()
        );
        if !seen.insert(id.clone()) {
            return Err(PipelineError::stage(
                STAGE,
                format!("two files map to network id `{id}`"),
            ));
        }
        let bytes = fs::read(&path).map_err(io)?;
        let loaded = load_graph_with(&bytes, LoadOptions { symmetrize: true })
            .map_err(|e| PipelineError::stage(STAGE, format!("{}: {e}", path.display())))?;
        let ids = (!loaded.ids.is_identity()).then(|| write_id_map(&loaded.ids));
        out.push((
            Network {
                digest: digest_of(&loaded.graph, None),
                graph: Arc::new(loaded.graph),
                ground_truth: None,
                origin: NetworkOrigin::Real {
                    file: path
                        .file_name()
                        .and_then(|s| s.to_str())
                        .unwrap_or_default()
                        .to_string(),
                },
                id,
            },
            ids,
        ));
    }
    Ok(out)
}

pub(crate) fn build(config: &PipelineConfig, art: &mut Artifacts) -> Result<Vec<Network>, PipelineError> {
    let mut networks = synthetic(config)?;
    let mut id_maps = Vec::new();
    if let Some(dir) = &config.real_dir {
        for (net, ids) in real(dir)? {
            if let Some(ids) = ids {
                id_maps.push((net.id.clone(), ids));
            }
            networks.push(net);
        }
    }
    let mut table = String::from("id,origin,n,edges,mean_degree,mu,mode,repeat,seed,realized_mu,source\n");
    for net in &networks {
        art.write(STAGE, &format!("networks/{}.edges", net.id), write_graph(&net.graph))?;
        if let Some(gt) = &net.ground_truth {
            art.write(STAGE, &format!("networks/{}.gt", net.id), write_cover(gt))?;
        }
        let g = &net.graph;
        let mean_degree = match g.node_count() {
            0 => 0.0,
            n => 2.0 * g.edge_count() as f64 / n as f64,
        };
        let row = match &net.origin {
            NetworkOrigin::Synthetic {
                mu,
                mode,
                repeat,
                seed,
                realized_mu,
                ..
            } => format!(
                "{},synthetic,{},{},{mean_degree},{mu},{},{repeat},{seed},{realized_mu},\n",
                net.id,
                g.node_count(),
                g.edge_count(),
                mode.as_str()
            ),
            NetworkOrigin::Real { file } => format!(
                "{},real,{},{},{mean_degree},,,,,,{file}\n",
                net.id,
                g.node_count(),
                g.edge_count()
            ),
        };
        table.push_str(&row);
    }
    for (id, ids) in id_maps {
        art.write(STAGE, &format!("networks/{id}.ids"), ids)?;
    }
    art.write(STAGE, "networks.csv", table)?;
    if networks.is_empty() {
        return Err(PipelineError::stage(STAGE, "no networks to analyse"));
    }
    Ok(networks)
}

pub(crate) fn summary(networks: &[Network]) -> Value {
    let synthetic = networks.iter().filter(|n| n.is_synthetic()).count();
    json!({
        "synthetic": synthetic,
        "real": networks.len() - synthetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_readable_and_distinct() {
        assert_eq!(
            benchmark_id(50, 0.07, BenchMode::Disjoint, 3),
            "lfr-n50-mu0.07-disjoint-r03"
        );
        assert_ne!(
            benchmark_id(50, 0.07, BenchMode::Disjoint, 3),
            benchmark_id(50, 0.07, BenchMode::Overlapping, 3)
        );
    }

    #[test]
    fn ground_truth_enters_the_digest() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let a = Cover::from_labels(&[0, 0, 1, 1]);
        let b = Cover::from_labels(&[0, 1, 0, 1]);
        assert_ne!(digest_of(&g, Some(&a)), digest_of(&g, Some(&b)));
        assert_ne!(digest_of(&g, Some(&a)), digest_of(&g, None));
    }

    #[test]
    fn real_directory_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.edges"), "x y\ny z\nz y\n").unwrap();
        fs::write(dir.path().join("a.txt"), "0 1\n1 2\n").unwrap();
        fs::write(dir.path().join("readme.md"), "not a graph").unwrap();
        let nets = real(dir.path()).unwrap();
        let ids: Vec<&str> = nets.iter().map(|(n, _)| n.id.as_str()).collect();
        assert_eq!(ids, ["real-a", "real-b"]);
        assert!(nets[0].1.is_none());
        assert!(nets[1].1.is_some());
        assert_eq!(nets[1].0.graph.edge_count(), 2);
    }
}
