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

/// Two-level map equation, in bits per step of an undirected random walk.
///
/// Visit rates are weighted degrees over `2W`; a module's exit rate is its
/// boundary weight over `2W`. The index codebook is weighted by the total
/// exit rate, each module codebook by its exit rate plus its visit rate.
pub fn map_codelength(graph: &Graph, partition: &Cover) -> Result<f64, MetricsError> {
    let labels = partition.labels().ok_or(MetricsError::NotAPartition)?;
    if graph.edge_count() == 0 {
        return Err(MetricsError::NoEdges);
    }
    let two_w = 2.0 * graph.total_weight();
    let k = partition.len();
    let mut exit = vec![0.0; k];
    for e in graph.edges() {
        let (a, b) = (labels[e.u], labels[e.v]);
        if a != b {
            exit[a] += e.weight / two_w;
            exit[b] += e.weight / two_w;
        }
    }
    let total_exit: f64 = exit.iter().sum();

    let entropy = |probs: &mut dyn Iterator<Item = f64>, total: f64| -> f64 {
        probs
            .filter(|&p| p > 0.0)
            .map(|p| {
                let r = p / total;
                -r * r.log2()
            })
            .sum()
    };

    let mut length = 0.0;
    if total_exit > 0.0 {
        length += total_exit * entropy(&mut exit.iter().copied(), total_exit);
    }
    for (c, members) in partition.communities().iter().enumerate() {
        let visits = members.iter().map(|&v| graph.strength(v) / two_w);
        let rate = exit[c] + visits.clone().sum::<f64>();
        if rate > 0.0 {
            let mut probs = std::iter::once(exit[c]).chain(visits);
            length += rate * entropy(&mut probs, rate);
        }
    }
    Ok(length)
}
