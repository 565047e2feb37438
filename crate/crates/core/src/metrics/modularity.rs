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

use super::MetricsError;
use crate::graph::{Cover, Graph};

/// Newman modularity of a partition, using edge weights when present.
pub fn modularity(graph: &Graph, partition: &Cover) -> Result<f64, MetricsError> {
    let labels = partition.labels().ok_or(MetricsError::NotAPartition)?;
    let w = graph.total_weight();
    if graph.edge_count() == 0 {
        return Err(MetricsError::NoEdges);
    }
    let k = partition.len();
    let mut internal = vec![0.0; k];
    let mut volume = vec![0.0; k];
    for (v, &c) in labels.iter().enumerate() {
        volume[c] += graph.strength(v);
    }
    for e in graph.edges() {
        if labels[e.u] == labels[e.v] {
            internal[labels[e.u]] += e.weight;
        }
    }
    Ok(internal
        .iter()
        .zip(&volume)
        .map(|(&m_c, &vol)| m_c / w - (vol / (2.0 * w)).powi(2))
        .sum())
}

/// Overlapping modularity averaging, per community, the membership-weighted
/// in-minus-out balance of its nodes scaled by the community's edge density.
///
/// Singleton communities and zero-degree nodes contribute 0. Edge weights
/// are ignored.
pub fn lazar_modularity(graph: &Graph, cover: &Cover) -> f64 {
    if cover.is_empty() {
        return 0.0;
    }
    let s = cover.memberships();
    let mut mark = vec![usize::MAX; graph.node_count()];
    let mut total = 0.0;
    for (k, c) in cover.communities().iter().enumerate() {
        let n_c = c.len();
        if n_c < 2 {
            continue;
        }
        for &v in c {
            mark[v] = k;
        }
        let mut balance = 0.0;
        let mut twice_internal = 0usize;
        for &v in c {
            let d = graph.degree(v);
            if d == 0 {
                continue;
            }
            let k_in = graph.neighbor_ids(v).filter(|&u| mark[u] == k).count();
            let k_out = d - k_in;
            twice_internal += k_in;
            balance += (k_in as f64 - k_out as f64) / (d as f64 * s[v] as f64);
        }
        let m_c = twice_internal as f64 / 2.0;
        let pairs = (n_c * (n_c - 1)) as f64 / 2.0;
        total += (balance / n_c as f64) * (m_c / pairs);
    }
    total / cover.len() as f64
}

/// Selection score for grid search: Newman modularity for partitions, the
/// overlapping variant otherwise. Edgeless graphs score 0.
pub fn quality(graph: &Graph, cover: &Cover) -> f64 {
    if graph.edge_count() == 0 {
        return 0.0;
    }
    if cover.is_partition() {
        modularity(graph, cover).expect("partition on a graph with edges")
    } else {
        lazar_modularity(graph, cover)
    }
}
