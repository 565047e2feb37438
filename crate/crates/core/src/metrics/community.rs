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

//! Per-community descriptive statistics on unweighted topology.

use super::MetricsError;
use crate::graph::{Graph, NodeId};

/// `(m_S, c_S)`: edges with both endpoints in `community`, and edges with
/// exactly one.
pub fn internal_and_boundary(graph: &Graph, community: &[NodeId]) -> (usize, usize) {
    let mut inside = vec![false; graph.node_count()];
    for &v in community {
        inside[v] = true;
    }
    let mut twice_internal = 0;
    let mut boundary = 0;
    for &v in community {
        for u in graph.neighbor_ids(v) {
            if inside[u] {
                twice_internal += 1;
            } else {
                boundary += 1;
            }
        }
    }
    (twice_internal / 2, boundary)
}

fn check(community: &[NodeId]) -> Result<(), MetricsError> {
    if community.is_empty() {
        Err(MetricsError::EmptyCommunity)
    } else {
        Ok(())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `c_S / (2 m_S + c_S)`; 0 for a community without incident edges.
pub fn conductance(graph: &Graph, community: &[NodeId]) -> Result<f64, MetricsError> {
    check(community)?;
    let (m_s, c_s) = internal_and_boundary(graph, community);
    Ok(ratio(c_s, 2 * m_s + c_s))
}

/// Conductance plus the same boundary measured against the volume of the
/// complement, `2(m - m_S) - c_S`.
pub fn ncut(graph: &Graph, community: &[NodeId]) -> Result<f64, MetricsError> {
    check(community)?;
    let (m_s, c_s) = internal_and_boundary(graph, community);
    let m = graph.edge_count();
    Ok(ratio(c_s, 2 * m_s + c_s) + ratio(c_s, 2 * (m - m_s) - c_s))
}

/// Internal edge density; a singleton counts as complete.
pub fn density(graph: &Graph, community: &[NodeId]) -> Result<f64, MetricsError> {
    check(community)?;
    let size = community.len();
    if size == 1 {
        return Ok(1.0);
    }
    let (m_s, _) = internal_and_boundary(graph, community);
    Ok(2.0 * m_s as f64 / (size * (size - 1)) as f64)
}
