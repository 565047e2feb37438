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

//! Scalar measures over graphs and covers. Logarithms are base 2 throughout.

mod community;
mod mapeq;
mod modularity;
mod onmi;
mod structure;

pub use community::{conductance, density, internal_and_boundary, ncut};
pub use mapeq::map_codelength;
pub use modularity::{lazar_modularity, modularity, quality};
pub use onmi::{onmi, OnmiVariant};
pub use structure::{avg_path_length, path_length_total, transitivity};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("covers over an empty node set")]
    EmptyUniverse,
    #[error("covers span different node counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("cover is overlapping; use lazar_modularity for overlapping covers")]
    NotAPartition,
    #[error("graph has no edges")]
    NoEdges,
    #[error("community is empty")]
    EmptyCommunity,
    #[error("nodes {0} and {1} are disconnected (infinite distance)")]
    Disconnected(usize, usize),
    #[error("need at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("unknown oNMI variant `{0}` (expected MAX, LFK or SUM)")]
    UnknownVariant(String),
}

/// `p log2 p` with the `0 log 0 = 0` convention.
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}
