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

//! The end-to-end experiment: benchmarks, detector sweep, similarity
//! network, backbone and analyses, written to one artifact directory.
//!
//! Every output except `timings.csv` and `execution.json` is a pure
//! function of the configuration; the worker count and the state of the
//! result cache only change how long a run takes.

mod cache;
mod config;
mod networks;
mod runs;
mod study;

pub use cache::{cache_key, content_digest, derive_seed, RunCache};
pub use config::{env_name, BenchMode, ConfigError, DeltaChoice, PipelineConfig, ENV_PREFIX, KEYS};
pub use networks::{benchmark_id, Network, NetworkOrigin};
pub use runs::{ExecutionStats, TaskOutcome};
pub use study::AsnSummary;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

use crate::algorithms::{default_registry, parse_registry, write_registry, Registry, RegistryError, RunStatus};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("registry: {0}")]
    Registry(#[from] RegistryError),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    /// Process exit status: 2 for configuration problems, 3 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Registry(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }

    pub(crate) fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

/// How far to take a run. Later goals include every earlier stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Benchmarks,
    Runs,
    Similarity,
    GroundTruth,
    Asn,
    Backbone,
    Analysis,
    Robustness,
    All,
}

impl Goal {
    fn depth(self) -> u8 {
        match self {
            Goal::Benchmarks => 1,
            Goal::Runs => 2,
            Goal::Similarity | Goal::GroundTruth => 3,
            Goal::Asn => 4,
            Goal::Backbone => 5,
            Goal::Analysis | Goal::Robustness | Goal::All => 6,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Goal::Benchmarks => "benchmarks",
            Goal::Runs => "runs",
            Goal::Similarity => "similarity",
            Goal::GroundTruth => "ground-truth",
            Goal::Asn => "asn",
            Goal::Backbone => "backbone",
            Goal::Analysis => "analysis",
            Goal::Robustness => "robustness",
            Goal::All => "all",
        }
    }

    fn wants_ranking(self) -> bool {
        matches!(self, Goal::GroundTruth | Goal::Analysis | Goal::All)
    }

    fn wants_suite(self) -> bool {
        matches!(self, Goal::Analysis | Goal::All)
    }

    fn wants_robustness(self) -> bool {
        matches!(self, Goal::Robustness | Goal::All)
    }
}

/// Top-level names the pipeline writes; cleared at the start of a run so
/// the directory never mixes outputs of different configurations. The
/// result cache is kept.
const OWNED_ENTRIES: [&str; 24] = [
    "networks",
    "networks.csv",
    "covers",
    "runs.csv",
    "timings.csv",
    "similarity",
    "similarity_gt",
    "asn.csv",
    "asn_backbone.csv",
    "asn_communities.cover",
    "asn_communities_overlap.cover",
    "feature_table.csv",
    "stats_table.csv",
    "ccdf.csv",
    "gt_ranking.csv",
    "null_model.csv",
    "null_model_samples.csv",
    "robustness.csv",
    "sub_asn_overlapping.csv",
    "manifest.json",
    "execution.json",
    "errors.jsonl",
    "work",
    "registry.tsv",
];

/// Outputs whose bytes depend on timing rather than configuration.
const VOLATILE: [&str; 2] = ["timings.csv", "execution.json"];

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// The artifact directory and the record of what was written into it.
pub(crate) struct Artifacts {
    root: PathBuf,
    files: BTreeSet<String>,
    errors: Vec<Value>,
}

impl Artifacts {
    fn open(root: &Path) -> Result<Self, PipelineError> {
        let io = |e: std::io::Error| PipelineError::stage("setup", format!("{}: {e}", root.display()));
        fs::create_dir_all(root).map_err(io)?;
        for name in OWNED_ENTRIES {
            let p = root.join(name);
            if p.is_dir() {
                fs::remove_dir_all(&p).map_err(io)?;
            } else if p.exists() {
                fs::remove_file(&p).map_err(io)?;
            }
        }
        Ok(Artifacts {
            root: root.to_path_buf(),
            files: BTreeSet::new(),
            errors: Vec::new(),
        })
    }

    pub(crate) fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Writes `rel` atomically and records it for the manifest.
    pub(crate) fn write(
        &mut self,
        stage: &'static str,
        rel: &str,
        bytes: impl AsRef<[u8]>,
    ) -> Result<(), PipelineError> {
        let target = self.root.join(rel);
        let dir = target.parent().expect("relative path below the root");
        let io = |e: std::io::Error| PipelineError::stage(stage, format!("writing {rel}: {e}"));
        fs::create_dir_all(dir).map_err(io)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, bytes).map_err(io)?;
        fs::rename(&tmp, &target).map_err(io)?;
        self.files.insert(rel.to_string());
        Ok(())
    }

    pub(crate) fn log_error(&mut self, entry: Value) {
        self.errors.push(entry);
    }

    fn digests(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .filter(|f| !VOLATILE.contains(&f.as_str()))
            .filter_map(|f| {
                fs::read(self.root.join(f))
                    .ok()
                    .map(|b| (f.clone(), content_digest(&b)))
            })
            .collect()
    }
}

/// What a run produced, for callers that want numbers without parsing
/// the artifacts.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub output: PathBuf,
    pub networks: Vec<Network>,
    pub outcomes: Vec<TaskOutcome>,
    pub execution: ExecutionStats,
    pub asn: Option<AsnSummary>,
}

impl PipelineReport {
    pub fn count(&self, status: RunStatus) -> usize {
        self.outcomes.iter().filter(|o| o.record.status == status).count()
    }
}

pub fn load_registry(config: &PipelineConfig) -> Result<Registry, PipelineError> {
    match &config.registry {
        None => Ok(default_registry()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            Ok(parse_registry(&text)?)
        }
    }
}

/// Runs every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    run_until(config, Goal::All)
}

/// Runs the stages `goal` needs. Detector results come from the cache in
/// `<output>/cache` when present. On failure the artifacts written so far
/// are kept, along with `errors.jsonl` and a manifest marked failed.
pub fn run_until(config: &PipelineConfig, goal: Goal) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    let registry = load_registry(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::stage("setup", e))?;
    let mut art = Artifacts::open(&config.output)?;
    let started = Instant::now();
    let mut stages: BTreeMap<&'static str, Value> = BTreeMap::new();
    let mut report = PipelineReport {
        output: config.output.clone(),
        networks: Vec::new(),
        outcomes: Vec::new(),
        execution: ExecutionStats::default(),
        asn: None,
    };
    let result = pool.install(|| drive(config, goal, &registry, &mut art, &mut stages, &mut report));
    if let Err(e) = &result {
        let stage = match e {
            PipelineError::Stage { stage, .. } => *stage,
            _ => "setup",
        };
        art.log_error(json!({"stage": stage, "error": e.to_string()}));
    }
    report.execution.wall_seconds = started.elapsed().as_secs_f64();
    finish(
        config,
        goal,
        &registry,
        &mut art,
        stages,
        &report,
        result.as_ref().err(),
    )?;
    result.map(|_| report)
}

fn drive(
    config: &PipelineConfig,
    goal: Goal,
    registry: &Registry,
    art: &mut Artifacts,
    stages: &mut BTreeMap<&'static str, Value>,
    report: &mut PipelineReport,
) -> Result<(), PipelineError> {
    art.write("setup", "registry.tsv", write_registry(registry))?;
    let networks = networks::build(config, art)?;
    stages.insert("networks", networks::summary(&networks));
    report.networks = networks;
    if goal.depth() < 2 {
        return Ok(());
    }
    let cache = RunCache::open(&config.output.join("cache")).map_err(|e| PipelineError::stage("runs", e))?;
    let (outcomes, stats) = runs::sweep(config, registry, &report.networks, &cache, art)?;
    stages.insert("runs", runs::summary(&outcomes, &stats));
    report.outcomes = outcomes;
    report.execution = stats;
    if goal.depth() < 3 {
        return Ok(());
    }
    let mut s = study::Study::new(config, registry, &report.networks, &report.outcomes);
    s.similarity(art)?;
    if goal.wants_ranking() {
        s.ranking(art)?;
    }
    if goal.depth() >= 4 {
        s.asn(art)?;
    }
    if goal.depth() >= 5 {
        s.backbone(art)?;
    }
    if goal.wants_suite() {
        s.suite(art)?;
        s.null_model(art)?;
    }
    if goal.wants_robustness() {
        s.robustness(art)?;
    }
    stages.extend(s.summaries());
    report.asn = s.asn_summary();
    Ok(())
}

fn finish(
    config: &PipelineConfig,
    goal: Goal,
    registry: &Registry,
    art: &mut Artifacts,
    stages: BTreeMap<&'static str, Value>,
    report: &PipelineReport,
    failure: Option<&PipelineError>,
) -> Result<(), PipelineError> {
    let errors: String = art.errors.iter().map(|e| format!("{e}\n")).collect();
    art.write("finish", "errors.jsonl", errors)?;
    art.write(
        "finish",
        "execution.json",
        serde_json::to_string_pretty(&report.execution.to_json(config)).expect("json"),
    )?;
    let config_map: BTreeMap<String, String> = config.output_relevant().into_iter().collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "goal": goal.as_str(),
        "status": if failure.is_some() { "failed" } else { "complete" },
        "failure": failure.map(|e| e.to_string()),
        "config": config_map,
        "registry": {"entries": registry.len(), "digest": content_digest(write_registry(registry).as_bytes())},
        "stages": stages,
        "artifacts": art.digests(),
        "volatile": VOLATILE,
    });
    art.write(
        "finish",
        "manifest.json",
        format!("{}\n", serde_json::to_string_pretty(&manifest).expect("json")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::from(ConfigError::Invalid("x".into())).exit_code(), 2);
        assert_eq!(PipelineError::stage("runs", "boom").exit_code(), 3);
    }

    #[test]
    fn opening_clears_only_owned_entries() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("cache/ab")).unwrap();
        fs::create_dir_all(dir.path().join("covers/x")).unwrap();
        fs::write(dir.path().join("runs.csv"), "old").unwrap();
        fs::write(dir.path().join("notes.txt"), "mine").unwrap();
        Artifacts::open(dir.path()).unwrap();
        assert!(dir.path().join("cache/ab").is_dir());
        assert!(dir.path().join("notes.txt").exists());
        assert!(!dir.path().join("covers").exists());
        assert!(!dir.path().join("runs.csv").exists());
    }
}
