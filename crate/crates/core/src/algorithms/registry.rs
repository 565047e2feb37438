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

//! Algorithm registry and its tab-separated file format.
//!
//! Columns: `id kind command_template timeout param_grid overlapping
//! spreading modularity_based nsim`. `kind` is `builtin` (the id names the
//! detector), `builtin:<name>` for a configured variant, or `external`.
//! `param_grid` is a JSON object of value lists, `{}` for no parameters.
//! Unused cells hold `-`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Builtin, ParamSet};

const COLUMNS: [&str; 9] = [
    "id",
    "kind",
    "command_template",
    "timeout",
    "param_grid",
    "overlapping",
    "spreading",
    "modularity_based",
    "nsim",
];

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("duplicate algorithm id `{0}`")]
    DuplicateId(String),
    #[error("parameter grid: {0}")]
    Grid(String),
}

/// Membership of a detector in the four reporting categories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryFlags {
    pub overlapping: bool,
    pub spreading: bool,
    pub modularity_based: bool,
    pub nsim: bool,
}

/// Finite value lists per parameter name. The empty grid has exactly one
/// point, the empty parameter set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid(BTreeMap<String, Vec<f64>>);

impl ParamGrid {
    pub fn new(values: BTreeMap<String, Vec<f64>>) -> Result<Self, RegistryError> {
        for (name, list) in &values {
            if list.is_empty() {
                return Err(RegistryError::Grid(format!("`{name}` has no values")));
            }
            if let Some(bad) = list.iter().find(|v| !v.is_finite()) {
                return Err(RegistryError::Grid(format!("`{name}` has non-finite value {bad}")));
            }
        }
        Ok(ParamGrid(values))
    }

    pub fn singleton() -> Self {
        ParamGrid(BTreeMap::new())
    }

    pub fn parameters(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.0
    }

    /// Cartesian product, ordered lexicographically by parameter name then
    /// list position.
    pub fn points(&self) -> Vec<ParamSet> {
        let mut points = vec![ParamSet::new()];
        for (name, values) in &self.0 {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Ok(ParamGrid::singleton());
        }
        let map: BTreeMap<String, Vec<f64>> =
            serde_json::from_str(text).map_err(|e| RegistryError::Grid(e.to_string()))?;
        ParamGrid::new(map)
    }

    pub fn to_literal(&self) -> String {
        serde_json::to_string(&self.0).expect("finite values serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Builtin(Builtin),
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub id: String,
    pub kind: AlgorithmKind,
    pub command_template: String,
    pub timeout: Duration,
    pub param_grid: ParamGrid,
    pub flags: CategoryFlags,
}

impl AlgorithmSpec {
    pub fn builtin(id: &str, algo: Builtin, grid: ParamGrid) -> Self {
        AlgorithmSpec {
            id: id.to_string(),
            kind: AlgorithmKind::Builtin(algo),
            command_template: String::new(),
            timeout: DEFAULT_TIMEOUT,
            param_grid: grid,
            flags: algo.flags(),
        }
    }

    pub fn external(id: &str, template: &str, timeout: Duration, flags: CategoryFlags) -> Self {
        AlgorithmSpec {
            id: id.to_string(),
            kind: AlgorithmKind::External,
            command_template: template.to_string(),
            timeout,
            param_grid: ParamGrid::singleton(),
            flags,
        }
    }

    /// Whether every output is guaranteed to be a partition.
    pub fn partitioning(&self) -> bool {
        match self.kind {
            AlgorithmKind::Builtin(b) => b.is_partitioning(),
            AlgorithmKind::External => !self.flags.overlapping,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    entries: Vec<AlgorithmSpec>,
}

impl Registry {
    pub fn new(entries: Vec<AlgorithmSpec>) -> Result<Self, RegistryError> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.id.clone()) {
                return Err(RegistryError::DuplicateId(e.id.clone()));
            }
        }
        Ok(Registry { entries })
    }

    pub fn entries(&self) -> &[AlgorithmSpec] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&AlgorithmSpec> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parse_flag(cell: &str, line: usize) -> Result<bool, RegistryError> {
    match cell.trim() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        other => Err(RegistryError::Line {
            line,
            message: format!("flag `{other}` is not 0/1"),
        }),
    }
}

/// Parses a registry file. Blank lines, `#` comments and a leading header
/// row are skipped.
pub fn parse_registry(text: &str) -> Result<Registry, RegistryError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cells.first() == Some(&"id") && entries.is_empty() {
            continue;
        }
        let err = |message: String| RegistryError::Line { line, message };
        if cells.len() != COLUMNS.len() {
            return Err(err(format!(
                "expected {} tab-separated columns, found {}",
                COLUMNS.len(),
                cells.len()
            )));
        }
        let id = cells[0];
        if id.is_empty() || id == "-" || id.chars().any(char::is_whitespace) {
            return Err(err(format!("invalid id `{id}`")));
        }
        let kind = match cells[1] {
            "external" => AlgorithmKind::External,
            "builtin" => AlgorithmKind::Builtin(id.parse().map_err(|e: super::RunError| err(e.to_string()))?),
            k => match k.strip_prefix("builtin:") {
                Some(name) => AlgorithmKind::Builtin(name.parse().map_err(|e: super::RunError| err(e.to_string()))?),
                None => return Err(err(format!("unknown kind `{k}`"))),
            },
        };
        let template = match cells[2] {
            "-" => "",
            t => t,
        };
        if kind == AlgorithmKind::External && !(template.contains("{input}") && template.contains("{output}")) {
            return Err(err("external command needs {input} and {output}".into()));
        }
        let timeout = match cells[3] {
            "-" | "" => DEFAULT_TIMEOUT,
            t => {
                let secs: f64 = t
                    .parse()
                    .ok()
                    .filter(|s: &f64| s.is_finite() && *s > 0.0)
                    .ok_or_else(|| err(format!("invalid timeout `{t}`")))?;
                Duration::from_secs_f64(secs)
            }
        };
        let param_grid = ParamGrid::parse(cells[4]).map_err(|e| err(e.to_string()))?;
        let flags = CategoryFlags {
            overlapping: parse_flag(cells[5], line)?,
            spreading: parse_flag(cells[6], line)?,
            modularity_based: parse_flag(cells[7], line)?,
            nsim: parse_flag(cells[8], line)?,
        };
        entries.push(AlgorithmSpec {
            id: id.to_string(),
            kind,
            command_template: template.to_string(),
            timeout,
            param_grid,
            flags,
        });
    }
    Registry::new(entries)
}

pub fn write_registry(registry: &Registry) -> String {
    let flag = |b: bool| if b { "1" } else { "0" };
    let mut out = COLUMNS.join("\t");
    out.push('\n');
    for e in registry.entries() {
        let kind = match e.kind {
            AlgorithmKind::External => "external".to_string(),
            AlgorithmKind::Builtin(b) if b.name() == e.id => "builtin".to_string(),
            AlgorithmKind::Builtin(b) => format!("builtin:{}", b.name()),
        };
        let (template, timeout) = match e.kind {
            AlgorithmKind::External => (e.command_template.clone(), e.timeout.as_secs_f64().to_string()),
            AlgorithmKind::Builtin(_) => ("-".to_string(), "-".to_string()),
        };
        let row = [
            e.id.clone(),
            kind,
            template,
            timeout,
            e.param_grid.to_literal(),
            flag(e.flags.overlapping).into(),
            flag(e.flags.spreading).into(),
            flag(e.flags.modularity_based).into(),
            flag(e.flags.nsim).into(),
        ];
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Id of the external entry that copies the planted ground truth.
pub const GT_CLONE_ID: &str = "gt_clone";

/// The built-in suite with its default grids, fixed-parameter variants, and
/// a ground-truth copying adapter.
pub fn default_registry() -> Registry {
    let fixed = |name: &str, value: f64| {
        ParamGrid::new([(name.to_string(), vec![value])].into_iter().collect()).expect("finite")
    };
    let mut entries: Vec<AlgorithmSpec> = Builtin::ALL
        .into_iter()
        .map(|b| AlgorithmSpec::builtin(b.name(), b, b.default_grid()))
        .collect();
    let variants = [
        ("slpa_r02", Builtin::Slpa, "r", 0.2),
        ("slpa_r04", Builtin::Slpa, "r", 0.4),
        ("walktrap_t2", Builtin::Walktrap, "t", 2.0),
        ("walktrap_t4", Builtin::Walktrap, "t", 4.0),
        ("kclique_k3", Builtin::KClique, "k", 3.0),
        ("kclique_k4", Builtin::KClique, "k", 4.0),
        ("nsim_aggl_l2", Builtin::NsimAggl, "cut_level", 2.0),
        ("nsim_aggl_l4", Builtin::NsimAggl, "cut_level", 4.0),
    ];
    for (id, algo, param, value) in variants {
        entries.push(AlgorithmSpec::builtin(id, algo, fixed(param, value)));
    }
    entries.push(AlgorithmSpec::external(
        GT_CLONE_ID,
        "cp {input}.gt {output}",
        Duration::from_secs(10),
        CategoryFlags::default(),
    ));
    Registry::new(entries).expect("unique ids")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_cartesian() {
        let mut m = BTreeMap::new();
        m.insert("b".to_string(), vec![1.0, 2.0]);
        m.insert("a".to_string(), vec![0.5]);
        let g = ParamGrid::new(m).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0]["a"], 0.5);
        assert_eq!(pts[1]["b"], 2.0);
        assert_eq!(ParamGrid::singleton().points(), vec![ParamSet::new()]);
    }

    #[test]
    fn empty_value_list_rejected() {
        assert!(ParamGrid::parse(r#"{"k":[]}"#).is_err());
        assert!(ParamGrid::parse("[1]").is_err());
    }

    #[test]
    fn default_registry_round_trips() {
        let r = default_registry();
        assert!(r.len() >= 16);
        let text = write_registry(&r);
        assert_eq!(parse_registry(&text).unwrap(), r);
    }

    #[test]
    fn line_errors() {
        let header = COLUMNS.join("\t");
        let bad_kind = format!("{header}\nx\tplugin\t-\t-\t{{}}\t0\t0\t0\t0\n");
        assert!(matches!(
            parse_registry(&bad_kind),
            Err(RegistryError::Line { line: 2, .. })
        ));
        let no_output = "ext\texternal\tcat {input}\t5\t{}\t0\t0\t0\t0\n";
        assert!(parse_registry(no_output).is_err());
        let dup = "louvain\tbuiltin\t-\t-\t{}\t0\t0\t1\t0\nlouvain\tbuiltin\t-\t-\t{}\t0\t0\t1\t0\n";
        assert_eq!(parse_registry(dup), Err(RegistryError::DuplicateId("louvain".into())));
        let short = "louvain\tbuiltin\n";
        assert!(parse_registry(short).is_err());
    }

    #[test]
    fn variant_kind_parses() {
        let text = "k4\tbuiltin:kclique\t-\t-\t{\"k\":[4]}\t1\t0\t0\t0\n";
        let r = parse_registry(text).unwrap();
        assert_eq!(r.entries()[0].kind, AlgorithmKind::Builtin(Builtin::KClique));
        assert_eq!(r.entries()[0].param_grid.points()[0]["k"], 4.0);
    }
}
