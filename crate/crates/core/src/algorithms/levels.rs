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

//! Multi-level local moving shared by the modularity and map-equation
//! optimisers.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Cover, Graph};
use crate::metrics::plogp;

const EPS: f64 = 1e-12;
const MAX_SWEEPS: usize = 1000;

/// A graph whose nodes may be aggregates of original nodes.
struct LevelGraph {
    /// Weighted degree including internal weight.
    vol: Vec<f64>,
    /// Edge weight inside the aggregate.
    inner: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl LevelGraph {
    fn from_graph(graph: &Graph) -> Self {
        let n = graph.node_count();
        LevelGraph {
            vol: (0..n).map(|v| graph.strength(v)).collect(),
            inner: vec![0.0; n],
            adj: (0..n).map(|v| graph.neighbors(v).to_vec()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.vol.len()
    }

    /// Collapses each module into one node. `modules` must be dense.
    fn aggregate(&self, modules: &[usize], count: usize) -> LevelGraph {
        let mut vol = vec![0.0; count];
        let mut inner = vec![0.0; count];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for v in 0..self.len() {
            let a = modules[v];
            vol[a] += self.vol[v];
            inner[a] += self.inner[v];
            for &(u, w) in &self.adj[v] {
                let b = modules[u];
                if a == b {
                    // Each internal edge is seen from both ends.
                    inner[a] += w / 2.0;
                } else {
                    *links[a].entry(b).or_insert(0.0) += w;
                }
            }
        }
        LevelGraph {
            vol,
            inner,
            adj: links.into_iter().map(|m| m.into_iter().collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Objective {
    /// Negated Newman modularity.
    Modularity,
    /// Two-level map equation, without the constant node-entropy term.
    MapEquation,
}

struct Modules {
    objective: Objective,
    two_w: f64,
    vol: Vec<f64>,
    inner: Vec<f64>,
    exit_total: f64,
    term_total: f64,
}

impl Modules {
    fn new(objective: Objective, level: &LevelGraph, two_w: f64) -> Self {
        let mut m = Modules {
            objective,
            two_w,
            vol: level.vol.clone(),
            inner: level.inner.clone(),
            exit_total: 0.0,
            term_total: 0.0,
        };
        for c in 0..m.vol.len() {
            m.exit_total += m.exit(m.vol[c], m.inner[c]);
            m.term_total += m.term(m.vol[c], m.inner[c]);
        }
        m
    }

    fn exit(&self, vol: f64, inner: f64) -> f64 {
        ((vol - 2.0 * inner) / self.two_w).max(0.0)
    }

    fn term(&self, vol: f64, inner: f64) -> f64 {
        match self.objective {
            Objective::Modularity => {
                let share = vol / self.two_w;
                share * share - 2.0 * inner / self.two_w
            }
            Objective::MapEquation => {
                let q = self.exit(vol, inner);
                plogp(q + vol / self.two_w) - 2.0 * plogp(q)
            }
        }
    }

    fn global(&self, exit_total: f64) -> f64 {
        match self.objective {
            Objective::Modularity => 0.0,
            Objective::MapEquation => plogp(exit_total),
        }
    }

    fn cost(&self) -> f64 {
        self.global(self.exit_total) + self.term_total
    }

    /// Objective change when module `c` goes from `(vol, inner)` by the given
    /// increments; returns the change in exit total and in term total.
    fn shift(&self, c: usize, d_vol: f64, d_inner: f64) -> (f64, f64) {
        let (v0, i0) = (self.vol[c], self.inner[c]);
        let (v1, i1) = (v0 + d_vol, i0 + d_inner);
        (
            self.exit(v1, i1) - self.exit(v0, i0),
            self.term(v1, i1) - self.term(v0, i0),
        )
    }

    fn apply(&mut self, c: usize, d_vol: f64, d_inner: f64) {
        let (de, dt) = self.shift(c, d_vol, d_inner);
        self.exit_total += de;
        self.term_total += dt;
        self.vol[c] += d_vol;
        self.inner[c] += d_inner;
    }
}

/// Moves single nodes between neighbouring modules until no move lowers the
/// cost. Returns the module of each node and whether anything moved.
fn local_moving(level: &LevelGraph, objective: Objective, two_w: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.len();
    let mut module: Vec<usize> = (0..n).collect();
    let mut state = Modules::new(objective, level, two_w);
    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;
    for _ in 0..MAX_SWEEPS {
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let mut toward: BTreeMap<usize, f64> = BTreeMap::new();
            for &(u, w) in &level.adj[v] {
                *toward.entry(module[u]).or_insert(0.0) += w;
            }
            let home = module[v];
            let to_home = toward.get(&home).copied().unwrap_or(0.0);
            let (vol, inner) = (level.vol[v], level.inner[v]);
            state.apply(home, -vol, -(inner + to_home));

            let gain = |state: &Modules, c: usize, link: f64| {
                let (de, dt) = state.shift(c, vol, inner + link);
                state.global(state.exit_total + de) + state.term_total + dt
            };
            let mut best = (gain(&state, home, to_home), home, to_home);
            for (&c, &link) in &toward {
                if c == home {
                    continue;
                }
                let cost = gain(&state, c, link);
                if cost < best.0 - EPS {
                    best = (cost, c, link);
                }
            }
            state.apply(best.1, vol, inner + best.2);
            if best.1 != home {
                module[v] = best.1;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    (module, moved_any)
}

fn densify(labels: &mut [usize]) -> usize {
    let mut index = BTreeMap::new();
    let mut next = 0;
    for l in labels.iter_mut() {
        let k = *index.entry(*l).or_insert_with(|| {
            next += 1;
            next - 1
        });
        *l = k;
    }
    next
}

/// Full multi-level optimisation; returns a module label per original node.
pub(super) fn optimise(graph: &Graph, objective: Objective, seed: u64) -> Vec<usize> {
    let n = graph.node_count();
    let two_w = 2.0 * graph.total_weight();
    let mut assignment: Vec<usize> = (0..n).collect();
    if two_w <= 0.0 {
        return assignment;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = LevelGraph::from_graph(graph);
    loop {
        let (mut modules, moved) = local_moving(&level, objective, two_w, &mut rng);
        if !moved {
            break;
        }
        let count = densify(&mut modules);
        for a in assignment.iter_mut() {
            *a = modules[*a];
        }
        level = level.aggregate(&modules, count);
    }
    assignment
}

pub(super) fn louvain(graph: &Graph, seed: u64) -> Cover {
    Cover::from_labels(&optimise(graph, Objective::Modularity, seed))
}

/// Map-equation cost of a labelling, up to the constant node-entropy term.
fn map_cost(graph: &Graph, labels: &[usize]) -> f64 {
    let mut labels = labels.to_vec();
    let count = densify(&mut labels);
    let level = LevelGraph::from_graph(graph).aggregate(&labels, count);
    Modules::new(Objective::MapEquation, &level, 2.0 * graph.total_weight()).cost()
}

/// Two-level map-equation minimisation. The connected components serve as
/// the fallback when local moving does not beat them.
pub(super) fn infomap(graph: &Graph, seed: u64) -> Cover {
    let found = optimise(graph, Objective::MapEquation, seed);
    if graph.total_weight() <= 0.0 {
        return Cover::from_labels(&found);
    }
    let components = graph.components();
    if map_cost(graph, &found) < map_cost(graph, &components) - EPS {
        Cover::from_labels(&found)
    } else {
        Cover::from_labels(&components)
    }
}
