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

//! End-to-end runs on small configurations.

use std::fs;
use std::path::Path;

use asnkit::algorithms::RunStatus;
use asnkit::pipeline::{run_until, BenchMode, ConfigError, Goal, PipelineConfig, PipelineError};

const SMALL_REGISTRY: &str =
    "id\tkind\tcommand_template\ttimeout\tparam_grid\toverlapping\tspreading\tmodularity_based\tnsim
labelprop\tbuiltin\t-\t-\t{}\t0\t1\t0\t0
louvain\tbuiltin\t-\t-\t{}\t0\t0\t1\t0
cnm\tbuiltin\t-\t-\t{}\t0\t0\t1\t0
infomap_2l\tbuiltin\t-\t-\t{}\t0\t0\t0\t0
gt_clone\texternal\tcp {input}.gt {output}\t10\t{}\t0\t0\t0\t0
broken\texternal\ttest -e {input}.none -a -e {output}\t10\t{}\t0\t0\t0\t0
";

fn small(dir: &Path) -> PipelineConfig {
    let registry = dir.join("registry.tsv");
    fs::write(&registry, SMALL_REGISTRY).unwrap();
    PipelineConfig {
        sizes: vec![50],
        mus: vec![0.07],
        repeats: 3,
        modes: vec![BenchMode::Disjoint],
        registry: Some(registry),
        null_size: 3,
        null_trials: 50,
        output: dir.join("out"),
        workers: 2,
        ..PipelineConfig::default()
    }
}

#[test]
fn goals_stop_after_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path());
    let report = run_until(&config, Goal::Runs).unwrap();
    let out = &config.output;
    assert!(out.join("runs.csv").is_file());
    assert!(out.join("manifest.json").is_file());
    assert!(!out.join("asn.csv").exists());
    assert!(report.asn.is_none());
    assert_eq!(report.outcomes.len(), 6 * 3);

    // A later goal reuses the cache; an earlier one removes stale outputs.
    let report = run_until(&config, Goal::Backbone).unwrap();
    assert_eq!(report.execution.invocations, 0);
    assert!(out.join("asn_backbone.csv").is_file());
    run_until(&config, Goal::Benchmarks).unwrap();
    assert!(!out.join("runs.csv").exists());
    assert!(out.join("networks.csv").is_file());
}

#[test]
fn failing_entries_are_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path());
    let report = run_until(&config, Goal::All).unwrap();
    assert_eq!(report.count(RunStatus::Failed), 3);
    assert_eq!(report.count(RunStatus::Ok), 15);
    let errors = fs::read_to_string(config.output.join("errors.jsonl")).unwrap();
    assert_eq!(errors.lines().filter(|l| l.contains("\"broken\"")).count(), 3);
    let runs = fs::read_to_string(config.output.join("runs.csv")).unwrap();
    assert!(runs.lines().any(|l| l.starts_with("broken,") && l.contains(",failed,")));
    let ranking = fs::read_to_string(config.output.join("gt_ranking.csv")).unwrap();
    assert!(ranking.lines().any(|l| l == "1,gt_clone,3"), "{ranking}");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(config.output.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
}

#[test]
fn failures_replay_from_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path());
    let cold = run_until(&config, Goal::Runs).unwrap();
    let warm = run_until(&config, Goal::Runs).unwrap();
    assert_eq!(warm.execution.invocations, 0);
    assert_eq!(warm.execution.cache_hits, cold.execution.invocations);
    assert_eq!(warm.count(RunStatus::Failed), 3);
}

#[test]
fn outputs_do_not_depend_on_workers_or_location() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = small(dir.path());
    a.workers = 1;
    let mut b = a.clone();
    b.workers = 4;
    b.output = dir.path().join("elsewhere");
    run_until(&a, Goal::All).unwrap();
    run_until(&b, Goal::All).unwrap();
    for name in [
        "manifest.json",
        "runs.csv",
        "asn.csv",
        "asn_backbone.csv",
        "stats_table.csv",
        "robustness.csv",
    ] {
        assert_eq!(
            fs::read(a.output.join(name)).unwrap(),
            fs::read(b.output.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_changes_the_benchmarks() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    run_until(&config, Goal::Benchmarks).unwrap();
    let first = fs::read(config.output.join("networks.csv")).unwrap();
    config.seed = 2;
    run_until(&config, Goal::Benchmarks).unwrap();
    assert_ne!(first, fs::read(config.output.join("networks.csv")).unwrap());
}

#[test]
fn real_networks_join_the_study() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("real");
    fs::create_dir(&real).unwrap();
    let mut edges = String::new();
    for c in 0..3 {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push_str(&format!("n{} n{}\n", 5 * c + i, 5 * c + j));
            }
        }
        edges.push_str(&format!("n{} n{}\n", 5 * c, (5 * c + 5) % 15));
    }
    fs::write(real.join("cliques.edges"), edges).unwrap();
    let mut config = small(dir.path());
    config.real_dir = Some(real);
    let report = run_until(&config, Goal::Robustness).unwrap();
    assert!(report.networks.iter().any(|n| n.id == "real-cliques"));
    assert!(config.output.join("networks/real-cliques.ids").is_file());
    let robustness = fs::read_to_string(config.output.join("robustness.csv")).unwrap();
    assert!(robustness.contains("synthetic_real"));
}

#[test]
fn invalid_configs_are_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.repeats = 0;
    let err = run_until(&config, Goal::All).unwrap_err();
    assert!(matches!(err, PipelineError::Config(ConfigError::Invalid(_))));
    assert_eq!(err.exit_code(), 2);
    assert!(!config.output.exists());

    let mut config = small(dir.path());
    config.sizes.clear();
    config.real_dir = Some(dir.path().join("missing"));
    let err = run_until(&config, Goal::Benchmarks).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let manifest = fs::read_to_string(config.output.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));
}
