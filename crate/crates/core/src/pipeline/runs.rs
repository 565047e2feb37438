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

//! Stage two: every registry entry grid-searched on every network.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{cache_key, derive_seed, Artifacts, Network, PipelineConfig, PipelineError, RunCache};
use crate::algorithms::{
    format_params, grid_search_with, run, run_external, AlgorithmKind, AlgorithmSpec, ParamSet, Registry, RunError,
    RunRecord, RunStatus,
};
use crate::graph::{write_cover, Cover};

const STAGE: &str = "runs";

/// One (algorithm, network) task after grid search.
#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub record: RunRecord,
    /// Quality of the chosen cover.
    pub score: Option<f64>,
    pub point_failures: Vec<(ParamSet, RunError)>,
}

/// Counters that depend on cache state and scheduling.
#[derive(Debug, Clone, Default)]
pub struct ExecutionStats {
    /// Detector executions during the sweep, cache hits excluded.
    pub invocations: usize,
    pub cache_hits: usize,
    /// Detector executions spent re-checking cached covers.
    pub audited: usize,
    pub audit_mismatches: Vec<String>,
    pub wall_seconds: f64,
}

impl ExecutionStats {
    pub(crate) fn to_json(&self, config: &PipelineConfig) -> Value {
        json!({
            "workers": config.workers,
            "output": config.output.display().to_string(),
            "detector_invocations": self.invocations,
            "cache_hits": self.cache_hits,
            "audited": self.audited,
            "audit_mismatches": self.audit_mismatches,
            "wall_seconds": self.wall_seconds,
        })
    }
}

/// Identity of an entry for caching: anything that can change its output.
fn fingerprint(spec: &AlgorithmSpec) -> String {
    match spec.kind {
        AlgorithmKind::Builtin(b) => format!("{}|builtin:{}", spec.id, b.name()),
        AlgorithmKind::External => format!(
            "{}|external|{}|{}ms",
            spec.id,
            spec.command_template,
            spec.timeout.as_millis()
        ),
    }
}

fn execute(
    spec: &AlgorithmSpec,
    net: &Network,
    params: &ParamSet,
    seed: u64,
    workdir: &Path,
) -> Result<Cover, RunError> {
    match spec.kind {
        AlgorithmKind::Builtin(algo) => run(algo, &net.graph, params, seed),
        AlgorithmKind::External => {
            let out = run_external(spec, &net.graph, params, workdir, seed, net.ground_truth.as_deref());
            let _ = fs::remove_dir_all(workdir);
            out
        }
    }
}

struct Task<'a> {
    spec: &'a AlgorithmSpec,
    net: &'a Network,
}

struct Cached {
    task: usize,
    params: ParamSet,
    key: String,
}

pub(crate) fn sweep(
    config: &PipelineConfig,
    registry: &Registry,
    networks: &[Network],
    cache: &RunCache,
    art: &mut Artifacts,
) -> Result<(Vec<TaskOutcome>, ExecutionStats), PipelineError> {
    let tasks: Vec<Task> = registry
        .entries()
        .iter()
        .flat_map(|spec| networks.iter().map(move |net| Task { spec, net }))
        .collect();
    let invocations = AtomicUsize::new(0);
    let hits = AtomicUsize::new(0);
    let work = art.path("work");

    let results: Vec<(TaskOutcome, Vec<Cached>)> = tasks
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            let seed = derive_seed(config.seed, &t.spec.id, &t.net.id);
            let print = fingerprint(t.spec);
            let n = t.net.graph.node_count();
            let mut stored = Vec::new();
            let start = Instant::now();
            let outcome = grid_search_with(t.spec, &t.net.graph, |params| {
                let key = cache_key(&print, params, &t.net.digest, seed);
                let result = match cache.get(&key, n) {
                    Some(hit) => {
                        hits.fetch_add(1, Ordering::Relaxed);
                        hit
                    }
                    None => {
                        invocations.fetch_add(1, Ordering::Relaxed);
                        // Canonical order, so fresh and cached covers feed identical
                        // floating-point sums downstream.
                        let r = execute(t.spec, t.net, params, seed, &work.join(&key)).map(|c| c.canonical());
                        if let Err(e) = cache.put(&key, &r) {
                            log::warn!("cannot cache {key}: {e}");
                        }
                        r
                    }
                };
                if result.is_ok() {
                    stored.push(Cached {
                        task: index,
                        params: params.clone(),
                        key,
                    });
                }
                result
            });
            let seconds = start.elapsed().as_secs_f64();
            let outcome = match outcome {
                Ok(o) => TaskOutcome {
                    record: RunRecord::ok(&t.spec.id, &t.net.id, o.params, o.cover, seconds),
                    score: Some(o.score),
                    point_failures: o.failures,
                },
                Err(e) => TaskOutcome {
                    record: RunRecord::failed(&t.spec.id, &t.net.id, &e, seconds),
                    score: None,
                    point_failures: Vec::new(),
                },
            };
            (outcome, stored)
        })
        .collect();
    let _ = fs::remove_dir_all(&work);

    let mut stats = ExecutionStats {
        invocations: invocations.into_inner(),
        cache_hits: hits.into_inner(),
        ..ExecutionStats::default()
    };
    let mut candidates = Vec::new();
    let mut outcomes = Vec::new();
    for (o, stored) in results {
        outcomes.push(o);
        candidates.extend(stored);
    }
    audit(config, &tasks, cache, &mut candidates, &mut stats, &work);
    let _ = fs::remove_dir_all(&work);
    for m in &stats.audit_mismatches {
        art.log_error(json!({"stage": STAGE, "audit_mismatch": m}));
    }

    outcomes.sort_by(|a, b| (&a.record.algorithm, &a.record.network).cmp(&(&b.record.algorithm, &b.record.network)));
    write(art, &outcomes)?;
    Ok((outcomes, stats))
}

/// Recomputes a seeded random choice of cached covers and compares them
/// with the stored bytes.
fn audit(
    config: &PipelineConfig,
    tasks: &[Task],
    cache: &RunCache,
    candidates: &mut [Cached],
    stats: &mut ExecutionStats,
    work: &Path,
) {
    candidates.sort_by(|a, b| a.key.cmp(&b.key));
    let count = config.audit.min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "cache-audit", ""));
    let mut chosen = sample(&mut rng, candidates.len(), count).into_vec();
    chosen.sort_unstable();
    let mismatches: Vec<Option<String>> = chosen
        .par_iter()
        .map(|&i| {
            let c = &candidates[i];
            let t = &tasks[c.task];
            let seed = derive_seed(config.seed, &t.spec.id, &t.net.id);
            let fresh = execute(t.spec, t.net, &c.params, seed, &work.join(format!("audit-{}", c.key)));
            let stored = cache.get_cover(&c.key, t.net.graph.node_count());
            match (fresh, stored) {
                (Ok(f), Some(s)) if f.same_as(&s) => None,
                (fresh, _) => Some(format!(
                    "{} on {} [{}]: recomputed {}",
                    t.spec.id,
                    t.net.id,
                    format_params(&c.params),
                    match fresh {
                        Ok(_) => "a different cover".to_string(),
                        Err(e) => format!("an error: {e}"),
                    }
                )),
            }
        })
        .collect();
    stats.audited = chosen.len();
    stats.audit_mismatches = mismatches.into_iter().flatten().collect();
}

fn write(art: &mut Artifacts, outcomes: &[TaskOutcome]) -> Result<(), PipelineError> {
    let mut runs = csv::Writer::from_writer(Vec::new());
    let mut timings = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| PipelineError::stage(STAGE, e);
    runs.write_record([
        "algorithm",
        "network",
        "status",
        "params",
        "score",
        "failed_points",
        "detail",
    ])
    .map_err(csv_err)?;
    timings
        .write_record(["algorithm", "network", "seconds"])
        .map_err(csv_err)?;
    let mut failures = Vec::new();
    for o in outcomes {
        let r = &o.record;
        runs.write_record([
            r.algorithm.as_str(),
            r.network.as_str(),
            r.status.as_str(),
            &format_params(&r.params),
            &o.score.map_or(String::new(), |s| s.to_string()),
            &o.point_failures.len().to_string(),
            &r.detail,
        ])
        .map_err(csv_err)?;
        timings
            .write_record([r.algorithm.as_str(), r.network.as_str(), &format!("{:.6}", r.seconds)])
            .map_err(csv_err)?;
        if r.status != RunStatus::Ok {
            failures.push(json!({
                "stage": STAGE,
                "algorithm": r.algorithm,
                "network": r.network,
                "status": r.status.as_str(),
                "error": r.detail,
            }));
        }
        for (params, e) in &o.point_failures {
            failures.push(json!({
                "stage": STAGE,
                "algorithm": r.algorithm,
                "network": r.network,
                "params": format_params(params),
                "status": "point_failed",
                "error": e.to_string(),
            }));
        }
        if let Some(cover) = &r.cover {
            art.write(
                STAGE,
                &format!("covers/{}/{}.cover", r.algorithm, r.network),
                write_cover(cover),
            )?;
        }
    }
    for f in failures {
        art.log_error(f);
    }
    let bytes = |w: csv::Writer<Vec<u8>>| w.into_inner().map_err(|e| PipelineError::stage(STAGE, e.to_string()));
    art.write(STAGE, "runs.csv", bytes(runs)?)?;
    art.write(STAGE, "timings.csv", bytes(timings)?)
}

pub(crate) fn summary(outcomes: &[TaskOutcome], stats: &ExecutionStats) -> Value {
    let count = |s: RunStatus| outcomes.iter().filter(|o| o.record.status == s).count();
    json!({
        "tasks": outcomes.len(),
        "ok": count(RunStatus::Ok),
        "failed": count(RunStatus::Failed),
        "timeout": count(RunStatus::Timeout),
        "audited": stats.audited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Builtin, CategoryFlags, ParamGrid};
    use std::time::Duration;

    #[test]
    fn fingerprints_separate_entries_and_templates() {
        let a = AlgorithmSpec::builtin("x", Builtin::Louvain, ParamGrid::singleton());
        let b = AlgorithmSpec::builtin("x", Builtin::Cnm, ParamGrid::singleton());
        assert_ne!(fingerprint(&a), fingerprint(&b));
        let e1 = AlgorithmSpec::external(
            "e",
            "cp {input}.gt {output}",
            Duration::from_secs(1),
            CategoryFlags::default(),
        );
        let e2 = AlgorithmSpec::external(
            "e",
            "true {input} {output}",
            Duration::from_secs(1),
            CategoryFlags::default(),
        );
        assert_ne!(fingerprint(&e1), fingerprint(&e2));
    }
}
