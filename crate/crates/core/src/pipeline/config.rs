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

//! Experiment configuration: defaults, INI files and environment overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::algorithms::Builtin;
use crate::asn::DEFAULT_TOP_K;
use crate::metrics::OnmiVariant;

/// Prefix of environment overrides: `ASNKIT_<SECTION>_<KEY>`.
pub const ENV_PREFIX: &str = "ASNKIT_";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {message}")]
    Read { path: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key `{section}.{key}`")]
    UnknownKey { section: String, key: String },
    #[error("bad value for `{section}.{key}`: {message}")]
    BadValue {
        section: String,
        key: String,
        message: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BenchMode {
    Disjoint,
    Overlapping,
}

impl BenchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Disjoint => "disjoint",
            BenchMode::Overlapping => "overlapping",
        }
    }
}

impl FromStr for BenchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disjoint" => Ok(BenchMode::Disjoint),
            "overlapping" => Ok(BenchMode::Overlapping),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    /// Smallest threshold found by `select_delta`.
    Auto,
    Fixed(f64),
}

impl fmt::Display for DeltaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaChoice::Auto => f.write_str("auto"),
            DeltaChoice::Fixed(d) => write!(f, "{d}"),
        }
    }
}

impl FromStr for DeltaChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DeltaChoice::Auto);
        }
        match s.parse::<f64>() {
            Ok(d) if d.is_finite() => Ok(DeltaChoice::Fixed(d)),
            _ => Err(format!("expected `auto` or a number, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sizes: Vec<usize>,
    pub mus: Vec<f64>,
    /// Independent benchmarks per grid cell.
    pub repeats: usize,
    pub modes: Vec<BenchMode>,
    /// Directory of edge-list files to ingest alongside the benchmarks.
    pub real_dir: Option<PathBuf>,
    /// Registry TSV; the built-in registry when absent.
    pub registry: Option<PathBuf>,
    pub variant: OnmiVariant,
    pub k: usize,
    pub delta: DeltaChoice,
    /// Similarity cut for the fixed-threshold aggregation.
    pub tau: f64,
    pub clusterer: Builtin,
    pub null_trials: usize,
    /// Size of the ground-truth-nearest node set tested by the null model.
    pub null_size: usize,
    pub output: PathBuf,
    pub workers: usize,
    pub seed: u64,
    /// Cached covers recomputed per run to check the cache.
    pub audit: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sizes: vec![50, 100],
            mus: vec![0.07, 0.21],
            repeats: 5,
            modes: vec![BenchMode::Disjoint, BenchMode::Overlapping],
            real_dir: None,
            registry: None,
            variant: OnmiVariant::Max,
            k: DEFAULT_TOP_K,
            delta: DeltaChoice::Auto,
            tau: 0.5,
            clusterer: Builtin::Infomap2l,
            null_trials: 1000,
            null_size: 10,
            output: PathBuf::from("asnkit-out"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 1,
            audit: 20,
        }
    }
}

/// Every `(section, key)` the configuration understands.
pub const KEYS: [(&str, &str); 17] = [
    ("benchmark", "sizes"),
    ("benchmark", "mus"),
    ("benchmark", "repeats"),
    ("benchmark", "modes"),
    ("real", "dir"),
    ("algorithms", "registry"),
    ("asn", "variant"),
    ("asn", "k"),
    ("asn", "delta"),
    ("asn", "tau"),
    ("analysis", "clusterer"),
    ("analysis", "null_trials"),
    ("analysis", "null_size"),
    ("run", "output"),
    ("run", "workers"),
    ("run", "seed"),
    ("run", "audit"),
];

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn scalar<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| format!("`{}`: {e}", value.trim()))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl PipelineConfig {
    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            section: section.to_string(),
            key: key.to_string(),
            message,
        };
        let section_lc = section.to_ascii_lowercase();
        let key_lc = key.to_ascii_lowercase();
        match (section_lc.as_str(), key_lc.as_str()) {
            ("benchmark", "sizes") => self.sizes = list(value).map_err(bad)?,
            ("benchmark", "mus") => self.mus = list(value).map_err(bad)?,
            ("benchmark", "repeats") => self.repeats = scalar(value).map_err(bad)?,
            ("benchmark", "modes") => self.modes = list(value).map_err(bad)?,
            ("real", "dir") => self.real_dir = optional_path(value),
            ("algorithms", "registry") => self.registry = optional_path(value),
            ("asn", "variant") => {
                self.variant = value
                    .trim()
                    .parse()
                    .map_err(|e: crate::metrics::MetricsError| bad(e.to_string()))?
            }
            ("asn", "k") => self.k = scalar(value).map_err(bad)?,
            ("asn", "delta") => self.delta = scalar(value).map_err(bad)?,
            ("asn", "tau") => self.tau = scalar(value).map_err(bad)?,
            ("analysis", "clusterer") => self.clusterer = scalar(value).map_err(bad)?,
            ("analysis", "null_trials") => self.null_trials = scalar(value).map_err(bad)?,
            ("analysis", "null_size") => self.null_size = scalar(value).map_err(bad)?,
            ("run", "output") => self.output = optional_path(value).ok_or_else(|| bad("empty path".into()))?,
            ("run", "workers") => self.workers = scalar(value).map_err(bad)?,
            ("run", "seed") => self.seed = scalar(value).map_err(bad)?,
            ("run", "audit") => self.audit = scalar(value).map_err(bad)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    section: section.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Applies every setting of an INI document. Keys outside a section
    /// are rejected.
    pub fn apply_ini(&mut self, text: &str) -> Result<(), ConfigError> {
        let doc = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        for (section, props) in doc.iter() {
            for (key, value) in props.iter() {
                match section {
                    Some(s) => self.set(s, key, value)?,
                    None => {
                        return Err(ConfigError::UnknownKey {
                            section: String::new(),
                            key: key.to_string(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_ini_file(&mut self, path: &std::path::Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.apply_ini(&text)
    }

    /// Applies `ASNKIT_<SECTION>_<KEY>` variables; other names are ignored.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(name, _)| name.starts_with(ENV_PREFIX))
            .collect();
        vars.sort();
        for (name, value) in vars {
            if let Some((section, key)) = KEYS.iter().find(|(s, k)| env_name(s, k) == name) {
                self.set(section, key, &value)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.repeats < 1 {
            return fail("benchmark.repeats must be at least 1");
        }
        if self.k < 1 {
            return fail("asn.k must be at least 1");
        }
        if self.workers < 1 {
            return fail("run.workers must be at least 1");
        }
        if self.null_trials < 1 {
            return fail("analysis.null_trials must be at least 1");
        }
        if self.null_size < 2 {
            return fail("analysis.null_size must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return fail("asn.tau must lie in [0, 1]");
        }
        if self.mus.iter().any(|m| !(0.0..1.0).contains(m)) {
            return fail("benchmark.mus must lie in [0, 1)");
        }
        let has_grid = !self.sizes.is_empty() && !self.mus.is_empty() && !self.modes.is_empty();
        if !has_grid && self.real_dir.is_none() {
            return fail("no benchmarks configured and no real-network directory");
        }
        Ok(())
    }

    /// Settings that determine the outputs, as `(section.key, value)`.
    /// The output directory and worker count are left out.
    pub fn output_relevant(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        vec![
            (
                "benchmark.sizes".into(),
                join(self.sizes.iter().map(|s| s.to_string()).collect()),
            ),
            (
                "benchmark.mus".into(),
                join(self.mus.iter().map(|s| s.to_string()).collect()),
            ),
            ("benchmark.repeats".into(), self.repeats.to_string()),
            (
                "benchmark.modes".into(),
                join(self.modes.iter().map(|m| m.as_str().to_string()).collect()),
            ),
            ("real.dir".into(), path(&self.real_dir)),
            ("algorithms.registry".into(), path(&self.registry)),
            ("asn.variant".into(), self.variant.to_string()),
            ("asn.k".into(), self.k.to_string()),
            ("asn.delta".into(), self.delta.to_string()),
            ("asn.tau".into(), self.tau.to_string()),
            ("analysis.clusterer".into(), self.clusterer.to_string()),
            ("analysis.null_trials".into(), self.null_trials.to_string()),
            ("analysis.null_size".into(), self.null_size.to_string()),
            ("run.seed".into(), self.seed.to_string()),
            ("run.audit".into(), self.audit.to_string()),
        ]
    }
}

pub fn env_name(section: &str, key: &str) -> String {
    format!(
        "{ENV_PREFIX}{}_{}",
        section.to_ascii_uppercase(),
        key.to_ascii_uppercase()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_overrides_defaults() {
        let mut c = PipelineConfig::default();
        c.apply_ini(
            "[benchmark]\nsizes = 30, 60\nmodes = disjoint\n[asn]\nvariant = lfk\ndelta = 1.5\n[run]\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(c.sizes, vec![30, 60]);
        assert_eq!(c.modes, vec![BenchMode::Disjoint]);
        assert_eq!(c.variant, OnmiVariant::Lfk);
        assert_eq!(c.delta, DeltaChoice::Fixed(1.5));
        assert_eq!(c.seed, 9);
        assert_eq!(c.k, DEFAULT_TOP_K);
    }

    #[test]
    fn env_beats_file() {
        let mut c = PipelineConfig::default();
        c.apply_ini("[asn]\nk = 3\n").unwrap();
        c.apply_env([
            ("ASNKIT_ASN_K".to_string(), "7".to_string()),
            ("ASNKIT_LOG".to_string(), "debug".to_string()),
            ("HOME".to_string(), "/x".to_string()),
        ])
        .unwrap();
        assert_eq!(c.k, 7);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = PipelineConfig::default();
        assert!(matches!(
            c.apply_ini("[asn]\nkk = 3\n"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(c.apply_ini("top = 1\n"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(
            c.apply_ini("[asn]\nk = three\n"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            c.apply_ini("[asn]\ndelta = soon\n"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn validation_bounds() {
        for (section, key) in [("benchmark", "repeats"), ("asn", "k"), ("run", "workers")] {
            let mut c = PipelineConfig::default();
            c.set(section, key, "0").unwrap();
            assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))), "{section}.{key}");
        }
        assert!(PipelineConfig::default().validate().is_ok());
    }

    #[test]
    fn every_listed_key_is_settable() {
        let samples = [
            "50", "0.1", "2", "disjoint", "", "", "sum", "3", "auto", "0.4", "louvain", "10", "5", "o", "2", "4", "3",
        ];
        assert_eq!(samples.len(), KEYS.len());
        let mut c = PipelineConfig::default();
        for ((section, key), value) in KEYS.iter().zip(samples) {
            c.set(section, key, value).unwrap();
        }
    }
}
