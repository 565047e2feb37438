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

//! LFR benchmark graphs with planted disjoint or overlapping communities.
//!
//! Degrees and community sizes follow truncated power laws. Each node splits
//! its degree into an internal part, wired inside its communities, and an
//! external part, wired only between nodes that share no community. Every
//! failed stage restarts the whole draw, up to [`MAX_RESTARTS`] times.

mod powerlaw;
mod wiring;

pub use powerlaw::{sample_truncated_powerlaw, solve_min_degree, PowerLaw};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Cover, Graph, NodeId};
use wiring::{wire_pool, Pair};

pub const MAX_RESTARTS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum LfrError {
    #[error("empty power-law support [{min}, {max}]")]
    EmptySupport { min: usize, max: usize },
    #[error("invalid LFR parameters: {0}")]
    InvalidParams(String),
    #[error("LFR generation failed after {attempts} restarts: {constraint}")]
    Infeasible { constraint: String, attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfrParams {
    pub n: usize,
    pub mu: f64,
    pub k_avg: f64,
    pub k_max: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub c_min: usize,
    pub c_max: usize,
    /// Number of overlapping nodes.
    pub o_n: usize,
    /// Memberships per overlapping node.
    pub o_m: usize,
    pub seed: u64,
}

impl LfrParams {
    /// One cell of the benchmark grid: mean degree 6, `K = max(ceil(n/5), 12)`,
    /// community sizes in `[5, ceil(n/4)]`, and in overlapping mode
    /// `ceil(n/10)` nodes with two memberships each.
    pub fn grid_cell(n: usize, mu: f64, overlapping: bool, seed: u64) -> Self {
        let k_avg = 6.0;
        let (o_n, o_m) = if overlapping { (n.div_ceil(10), 2) } else { (0, 1) };
        LfrParams {
            n,
            mu,
            k_avg,
            k_max: n.div_ceil(5).max((2.0 * k_avg) as usize),
            tau1: 2.0,
            tau2: 1.0,
            c_min: 5,
            c_max: n.div_ceil(4),
            o_n,
            o_m,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LfrError> {
        let fail = |m: String| Err(LfrError::InvalidParams(m));
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return fail(format!("mu = {} must lie in (0, 1)", self.mu));
        }
        if !(self.k_avg >= 1.0 && self.k_avg <= self.k_max as f64 && self.k_max < self.n) {
            return fail(format!(
                "need 1 <= k_avg <= k_max < n (k_avg = {}, k_max = {}, n = {})",
                self.k_avg, self.k_max, self.n
            ));
        }
        if !(1 <= self.c_min && self.c_min <= self.c_max && self.c_max <= self.n) {
            return fail(format!(
                "need 1 <= c_min <= c_max <= n (c_min = {}, c_max = {})",
                self.c_min, self.c_max
            ));
        }
        if self.o_n > self.n || self.o_m < 1 || (self.o_n > 0 && self.o_m < 2) {
            return fail(format!(
                "need o_n <= n, o_m >= 1 and o_m >= 2 when o_n > 0 (o_n = {}, o_m = {})",
                self.o_n, self.o_m
            ));
        }
        if !(self.tau1.is_finite() && self.tau2.is_finite()) {
            return fail("exponents must be finite".into());
        }
        Ok(())
    }

    pub fn total_memberships(&self) -> usize {
        self.n + self.o_n * (self.o_m - 1)
    }
}

#[derive(Debug, Clone)]
pub struct LfrBenchmark {
    pub graph: Graph,
    pub ground_truth: Cover,
    pub realized_mu: f64,
}

impl LfrBenchmark {
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.graph.edge_count() as f64 / self.graph.node_count() as f64
    }
}

/// Fraction of edges whose endpoints share no community; equals the fraction
/// of edge endpoints that sit on a boundary edge.
pub fn realized_mixing(graph: &Graph, cover: &Cover) -> f64 {
    if graph.edge_count() == 0 {
        return 0.0;
    }
    let comms = cover.node_communities();
    let boundary = graph
        .edges()
        .iter()
        .filter(|e| !shares_community(&comms[e.u], &comms[e.v]))
        .count();
    boundary as f64 / graph.edge_count() as f64
}

fn shares_community(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.contains(x))
}

pub fn generate_lfr(params: &LfrParams) -> Result<LfrBenchmark, LfrError> {
    params.validate()?;
    let k_min = solve_min_degree(params.tau1, params.k_avg, params.k_max)?;
    let degree_law = PowerLaw::new(params.tau1, k_min, params.k_max)?;
    let size_law = PowerLaw::new(params.tau2, params.c_min, params.c_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut last = String::new();
    for _ in 0..MAX_RESTARTS {
        match attempt(params, k_min, &degree_law, &size_law, &mut rng) {
            Ok(b) => return Ok(b),
            Err(reason) => last = reason,
        }
    }
    Err(LfrError::Infeasible {
        constraint: last,
        attempts: MAX_RESTARTS,
    })
}

fn tune_degree_sum<R: Rng>(
    degree: &mut [usize],
    target: usize,
    lo: usize,
    hi: usize,
    rng: &mut R,
) -> Result<(), String> {
    let mut sum: usize = degree.iter().sum();
    let n = degree.len();
    while sum != target {
        let grow = sum < target;
        let movable: Vec<usize> = (0..n)
            .filter(|&v| if grow { degree[v] < hi } else { degree[v] > lo })
            .collect();
        let Some(&v) = movable.choose(rng) else {
            return Err(format!(
                "degree sum {target} unreachable within degree bounds [{lo}, {hi}]"
            ));
        };
        if grow {
            degree[v] += 1;
            sum += 1;
        } else {
            degree[v] -= 1;
            sum -= 1;
        }
    }
    Ok(())
}

fn sample_sizes<R: Rng>(law: &PowerLaw, total: usize, p: &LfrParams, rng: &mut R) -> Result<Vec<usize>, String> {
    let mut sizes = Vec::new();
    let mut sum = 0;
    while sum < total {
        let s = law.sample(rng);
        if sum + s <= total {
            sizes.push(s);
            sum += s;
            continue;
        }
        let rest = total - sum;
        if rest >= p.c_min {
            sizes.push(rest);
            sum += rest;
        } else {
            // Spread the remainder over communities that can still grow.
            for _ in 0..rest {
                let growable: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] < p.c_max).collect();
                let Some(&c) = growable.choose(rng) else {
                    return Err(format!(
                        "community sizes in [{}, {}] cannot sum to {total}",
                        p.c_min, p.c_max
                    ));
                };
                sizes[c] += 1;
            }
            sum = total;
        }
    }
    if sizes.len() < p.o_m {
        return Err(format!(
            "{} communities cannot host nodes with {} memberships",
            sizes.len(),
            p.o_m
        ));
    }
    Ok(sizes)
}

/// Places every membership `(node, internal-degree share)` into a community
/// larger than the share, evicting and requeueing members when stuck.
fn assign_memberships<R: Rng>(
    requests: Vec<(NodeId, usize)>,
    sizes: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<(NodeId, usize)>>, String> {
    let k = sizes.len();
    let mut members: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); k];
    let mut node_comms: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut queue = requests;
    queue.shuffle(rng);
    // Popped from the back, so the largest shares are placed first.
    queue.sort_by_key(|&(_, share)| share);
    let mut budget = 200 * queue.len().max(1);
    while let Some((v, share)) = queue.pop() {
        budget -= 1;
        if budget == 0 {
            return Err("membership assignment did not settle".into());
        }
        let open: Vec<usize> = (0..k)
            .filter(|&c| members[c].len() < sizes[c] && sizes[c] > share)
            .filter(|c| !node_comms[v].contains(c))
            .collect();
        let target = if let Some(&c) = open.choose(rng) {
            c
        } else {
            let eligible: Vec<usize> = (0..k)
                .filter(|&c| sizes[c] > share && !node_comms[v].contains(&c))
                .collect();
            let Some(&c) = eligible.choose(rng) else {
                return Err(format!(
                    "no community larger than internal degree share {share} for node {v}"
                ));
            };
            let slot = rng.gen_range(0..members[c].len());
            let (u, u_share) = members[c].swap_remove(slot);
            node_comms[u].retain(|&x| x != c);
            queue.push((u, u_share));
            c
        };
        members[target].push((v, share));
        node_comms[v].push(target);
    }
    for m in &mut members {
        m.sort_unstable();
    }
    Ok(members)
}

fn attempt(
    p: &LfrParams,
    k_min: usize,
    degree_law: &PowerLaw,
    size_law: &PowerLaw,
    rng: &mut ChaCha8Rng,
) -> Result<LfrBenchmark, String> {
    let n = p.n;
    let mut degree: Vec<usize> = (0..n).map(|_| degree_law.sample(rng)).collect();
    let mut target = (n as f64 * p.k_avg).round() as usize;
    if target % 2 == 1 {
        target = if target < n * p.k_max { target + 1 } else { target - 1 };
    }
    tune_degree_sum(&mut degree, target, k_min, p.k_max, rng)?;

    let mut memberships = vec![1usize; n];
    for v in rand::seq::index::sample(rng, n, p.o_n) {
        memberships[v] = p.o_m;
    }

    // Stochastic rounding keeps the expected internal fraction at 1 - mu.
    let internal: Vec<usize> = degree
        .iter()
        .map(|&d| {
            let x = (1.0 - p.mu) * d as f64;
            let floor = x.floor();
            floor as usize + usize::from(rng.gen::<f64>() < x - floor)
        })
        .collect();

    let mut requests = Vec::with_capacity(p.total_memberships());
    for v in 0..n {
        let m = memberships[v];
        for j in 0..m {
            requests.push((v, internal[v] / m + usize::from(j < internal[v] % m)));
        }
    }
    let sizes = sample_sizes(size_law, p.total_memberships(), p, rng)?;
    let largest = *sizes.iter().max().expect("at least one community");
    if let Some(&(v, share)) = requests.iter().find(|r| r.1 >= largest) {
        return Err(format!(
            "internal degree share {share} of node {v} needs a community larger than the largest drawn ({largest})"
        ));
    }
    let mut members = assign_memberships(requests, &sizes, n, rng)?;

    let mut external: Vec<usize> = (0..n).map(|v| degree[v] - internal[v]).collect();
    // Every community needs an even number of internal stubs; move one stub
    // between the internal and external side of a member when it is odd.
    for (c, list) in members.iter_mut().enumerate() {
        let stubs: usize = list.iter().map(|m| m.1).sum();
        if stubs.is_multiple_of(2) {
            continue;
        }
        let size = sizes[c];
        let up: Vec<usize> = (0..list.len())
            .filter(|&i| external[list[i].0] > 0 && list[i].1 + 1 < size)
            .collect();
        let down: Vec<usize> = (0..list.len()).filter(|&i| list[i].1 > 0).collect();
        let grow = !up.is_empty() && (down.is_empty() || rng.gen::<bool>());
        if grow {
            let i = *up.choose(rng).expect("non-empty");
            list[i].1 += 1;
            external[list[i].0] -= 1;
        } else {
            let i = *down.choose(rng).expect("odd stub total implies a positive share");
            list[i].1 -= 1;
            external[list[i].0] += 1;
        }
    }

    let mut node_comms: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, list) in members.iter().enumerate() {
        for &(v, _) in list {
            node_comms[v].push(c);
        }
    }

    let mut taken: HashSet<Pair> = HashSet::new();
    let mut edges: Vec<Pair> = Vec::with_capacity(target / 2);
    for (c, list) in members.iter().enumerate() {
        let wired = wire_pool(list, &|_, _| true, &taken, rng)
            .ok_or_else(|| format!("could not wire community {c} as a simple graph"))?;
        for e in wired {
            taken.insert(e);
            edges.push(e);
        }
    }
    let ext_stubs: Vec<(NodeId, usize)> = (0..n).filter(|&v| external[v] > 0).map(|v| (v, external[v])).collect();
    let apart = |a: NodeId, b: NodeId| !shares_community(&node_comms[a], &node_comms[b]);
    let wired = wire_pool(&ext_stubs, &apart, &taken, rng)
        .ok_or_else(|| "could not wire external stubs between distinct communities".to_string())?;
    edges.extend(wired);

    let graph = Graph::from_edges(n, edges).map_err(|e| e.to_string())?;
    if (0..n).any(|v| graph.degree(v) != degree[v]) || graph.is_weighted() {
        return Err("wiring did not preserve the degree sequence".into());
    }
    let ground_truth = Cover::new(
        n,
        members
            .into_iter()
            .map(|list| list.into_iter().map(|(v, _)| v).collect())
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let realized_mu = realized_mixing(&graph, &ground_truth);
    Ok(LfrBenchmark {
        graph,
        ground_truth,
        realized_mu,
    })
}
