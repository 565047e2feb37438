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

//! `asnkit`: run the algorithm-similarity experiment or any prefix of it.
//!
//! Settings are resolved as defaults, then `--config` INI file, then
//! `ASNKIT_<SECTION>_<KEY>` environment variables, then flags.

use std::path::PathBuf;
use std::process::ExitCode;

use asnkit::algorithms::{default_registry, write_registry, RunStatus};
use asnkit::pipeline::{run_until, ConfigError, Goal, PipelineConfig, PipelineError, PipelineReport};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "asnkit",
    version,
    about = "Algorithm similarity networks for community detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the benchmark networks (and ingest real ones).
    GenBench(Settings),
    /// Grid-search every registry algorithm on every network.
    Run(Settings),
    /// Pairwise oNMI matrices per network.
    Similarity(Settings),
    /// Accumulate the similarity network and score its edges.
    BuildAsn(Settings),
    /// Keep the significant edges of the similarity network.
    Backbone(Settings),
    /// Cluster the backbone and write the feature, statistics, ranking and
    /// null-model tables.
    Analyze(Settings),
    /// Rank algorithms by agreement with the planted ground truth.
    RankGt(Settings),
    /// Compare oNMI variants and aggregation rules.
    Robustness(Settings),
    /// Every stage.
    Pipeline(Settings),
    /// Print the built-in registry as TSV, a starting point for custom ones.
    PrintRegistry,
}

#[derive(Args, Clone)]
struct Settings {
    /// INI file with [benchmark], [real], [algorithms], [asn], [analysis]
    /// and [run] sections.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Benchmark sizes, comma separated.
    #[arg(long)]
    sizes: Option<String>,
    /// Mixing parameters, comma separated.
    #[arg(long)]
    mus: Option<String>,
    /// Benchmarks per grid cell.
    #[arg(long)]
    repeats: Option<String>,
    /// `disjoint`, `overlapping` or both, comma separated.
    #[arg(long)]
    modes: Option<String>,
    /// Directory of edge-list files to ingest.
    #[arg(long)]
    real_dir: Option<String>,
    /// Registry TSV replacing the built-in one.
    #[arg(long)]
    registry: Option<String>,
    /// oNMI normalization: MAX, LFK or SUM.
    #[arg(long)]
    variant: Option<String>,
    /// Top-k neighbourhood size.
    #[arg(long)]
    k: Option<String>,
    /// Backbone threshold: `auto` or a number.
    #[arg(long)]
    delta: Option<String>,
    /// Similarity cut of the fixed-threshold aggregation.
    #[arg(long)]
    tau: Option<String>,
    /// Built-in detector used to cluster the similarity network.
    #[arg(long)]
    clusterer: Option<String>,
    /// Null-model trials.
    #[arg(long)]
    null_trials: Option<String>,
    /// Ground-truth-nearest algorithms tested by the null model.
    #[arg(long)]
    null_size: Option<String>,
    /// Artifact directory.
    #[arg(long, short)]
    out: Option<String>,
    /// Worker threads.
    #[arg(long, short = 'j')]
    workers: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Cached covers recomputed per run.
    #[arg(long)]
    audit: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<PipelineConfig, ConfigError> {
        let mut config = PipelineConfig::default();
        if let Some(path) = &self.config {
            config.apply_ini_file(path)?;
        }
        config.apply_env(std::env::vars())?;
        let flags = [
            ("benchmark", "sizes", &self.sizes),
            ("benchmark", "mus", &self.mus),
            ("benchmark", "repeats", &self.repeats),
            ("benchmark", "modes", &self.modes),
            ("real", "dir", &self.real_dir),
            ("algorithms", "registry", &self.registry),
            ("asn", "variant", &self.variant),
            ("asn", "k", &self.k),
            ("asn", "delta", &self.delta),
            ("asn", "tau", &self.tau),
            ("analysis", "clusterer", &self.clusterer),
            ("analysis", "null_trials", &self.null_trials),
            ("analysis", "null_size", &self.null_size),
            ("run", "output", &self.out),
            ("run", "workers", &self.workers),
            ("run", "seed", &self.seed),
            ("run", "audit", &self.audit),
        ];
        for (section, key, value) in flags {
            if let Some(v) = value {
                config.set(section, key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn print_report(report: &PipelineReport) {
    println!("artifacts: {}", report.output.display());
    println!("networks: {}", report.networks.len());
    if !report.outcomes.is_empty() {
        println!(
            "runs: {} ok, {} failed, {} timed out",
            report.count(RunStatus::Ok),
            report.count(RunStatus::Failed),
            report.count(RunStatus::Timeout)
        );
        let e = &report.execution;
        println!(
            "detector invocations: {} (cache hits {}, audited {}, audit mismatches {})",
            e.invocations,
            e.cache_hits,
            e.audited,
            e.audit_mismatches.len()
        );
    }
    if let Some(asn) = &report.asn {
        println!(
            "asn: {} nodes, {} edges, density {:.4}",
            asn.nodes, asn.edges, asn.density
        );
        if asn.delta.is_finite() {
            println!("backbone delta: {:.4}", asn.delta);
        }
        if let (Some(c), Some(one), Some(found)) = (asn.communities, asn.codelength_one_module, asn.codelength_found) {
            println!("communities: {c}; codelength {one:.4} bits in one module, {found:.4} clustered");
        }
    }
    println!("seconds: {:.2}", report.execution.wall_seconds);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ASNKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    let (settings, goal) = match cli.command {
        Command::PrintRegistry => {
            print!("{}", write_registry(&default_registry()));
            return ExitCode::SUCCESS;
        }
        Command::GenBench(s) => (s, Goal::Benchmarks),
        Command::Run(s) => (s, Goal::Runs),
        Command::Similarity(s) => (s, Goal::Similarity),
        Command::BuildAsn(s) => (s, Goal::Asn),
        Command::Backbone(s) => (s, Goal::Backbone),
        Command::Analyze(s) => (s, Goal::Analysis),
        Command::RankGt(s) => (s, Goal::GroundTruth),
        Command::Robustness(s) => (s, Goal::Robustness),
        Command::Pipeline(s) => (s, Goal::All),
    };
    let config = match settings.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("asnkit: {e}");
            return ExitCode::from(2);
        }
    };
    match run_until(&config, goal) {
        Ok(report) => {
            print_report(&report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("asnkit: {e}");
            let code = PipelineError::exit_code(&e);
            ExitCode::from(code as u8)
        }
    }
}
