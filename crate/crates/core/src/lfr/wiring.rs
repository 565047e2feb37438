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

//! Stub matching with degree-preserving repair.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::NodeId;

pub(super) type Pair = (NodeId, NodeId);

fn ordered(a: NodeId, b: NodeId) -> Pair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Pool<'a> {
    edges: Vec<Pair>,
    mult: HashMap<Pair, usize>,
    allowed: &'a dyn Fn(NodeId, NodeId) -> bool,
    taken: &'a HashSet<Pair>,
}

impl<'a> Pool<'a> {
    fn new(edges: Vec<Pair>, allowed: &'a dyn Fn(NodeId, NodeId) -> bool, taken: &'a HashSet<Pair>) -> Self {
        let mut mult = HashMap::new();
        for &e in &edges {
            *mult.entry(e).or_insert(0) += 1;
        }
        Pool {
            edges,
            mult,
            allowed,
            taken,
        }
    }

    fn acceptable(&self, e: Pair) -> bool {
        e.0 != e.1 && !self.taken.contains(&e) && (self.allowed)(e.0, e.1)
    }

    fn is_bad(&self, e: Pair) -> bool {
        !self.acceptable(e) || self.mult[&e] > 1
    }

    fn remove(&mut self, e: Pair) {
        let m = self.mult.get_mut(&e).expect("edge present");
        *m -= 1;
        if *m == 0 {
            self.mult.remove(&e);
        }
    }

    fn add(&mut self, e: Pair) {
        *self.mult.entry(e).or_insert(0) += 1;
    }

    /// Swaps endpoints between edges `i` and `j` if both results are valid.
    fn try_swap<R: Rng>(&mut self, i: usize, j: usize, rng: &mut R) -> bool {
        let (a, b) = self.edges[i];
        let (c, d) = self.edges[j];
        let (x, y) = if rng.gen::<bool>() {
            (ordered(a, c), ordered(b, d))
        } else {
            (ordered(a, d), ordered(b, c))
        };
        if x == y || !self.acceptable(x) || !self.acceptable(y) {
            return false;
        }
        self.remove(self.edges[i]);
        self.remove(self.edges[j]);
        if self.mult.contains_key(&x) || self.mult.contains_key(&y) {
            self.add(self.edges[i]);
            self.add(self.edges[j]);
            return false;
        }
        self.add(x);
        self.add(y);
        self.edges[i] = x;
        self.edges[j] = y;
        true
    }

    /// Rewires self-loops, multi-edges and forbidden pairs away.
    fn repair<R: Rng>(&mut self, rng: &mut R) -> bool {
        let m = self.edges.len();
        for _pass in 0..60 {
            let bad: Vec<usize> = (0..m).filter(|&i| self.is_bad(self.edges[i])).collect();
            if bad.is_empty() {
                return true;
            }
            if m < 2 {
                return false;
            }
            for i in bad {
                if !self.is_bad(self.edges[i]) {
                    continue;
                }
                for _ in 0..40 {
                    let j = rng.gen_range(0..m);
                    if j != i && self.try_swap(i, j, rng) {
                        break;
                    }
                }
            }
        }
        (0..m).all(|i| !self.is_bad(self.edges[i]))
    }

    /// Random valid swaps to decorrelate a deterministic construction.
    fn shuffle<R: Rng>(&mut self, rounds: usize, rng: &mut R) {
        let m = self.edges.len();
        if m < 2 {
            return;
        }
        for _ in 0..rounds {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i != j {
                self.try_swap(i, j, rng);
            }
        }
    }
}

/// Havel–Hakimi style greedy construction honouring `allowed` and `taken`.
fn greedy_construct(
    stubs: &[(NodeId, usize)],
    allowed: &dyn Fn(NodeId, NodeId) -> bool,
    taken: &HashSet<Pair>,
) -> Option<Vec<Pair>> {
    let mut residual: Vec<(NodeId, usize)> = stubs.iter().copied().filter(|s| s.1 > 0).collect();
    let mut edges = Vec::new();
    let mut made: HashSet<Pair> = HashSet::new();
    loop {
        residual.retain(|s| s.1 > 0);
        if residual.is_empty() {
            return Some(edges);
        }
        residual.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let (u, need) = residual[0];
        residual[0].1 = 0;
        let mut got = 0;
        for slot in residual.iter_mut().skip(1) {
            if got == need {
                break;
            }
            let e = ordered(u, slot.0);
            if slot.1 > 0 && allowed(u, slot.0) && !taken.contains(&e) && !made.contains(&e) {
                slot.1 -= 1;
                made.insert(e);
                edges.push(e);
                got += 1;
            }
        }
        if got < need {
            return None;
        }
    }
}

/// Pairs the stubs into a simple edge set avoiding `taken` and forbidden
/// pairs; every node keeps exactly its stub count. `None` when no valid
/// matching was found.
pub(super) fn wire_pool<R: Rng>(
    stubs: &[(NodeId, usize)],
    allowed: &dyn Fn(NodeId, NodeId) -> bool,
    taken: &HashSet<Pair>,
    rng: &mut R,
) -> Option<Vec<Pair>> {
    let mut list: Vec<NodeId> = stubs.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect();
    if list.len() % 2 == 1 {
        return None;
    }
    if list.is_empty() {
        return Some(Vec::new());
    }
    list.shuffle(rng);
    let edges: Vec<Pair> = list.chunks(2).map(|c| ordered(c[0], c[1])).collect();
    let mut pool = Pool::new(edges, allowed, taken);
    if pool.repair(rng) {
        return Some(pool.edges);
    }
    let built = greedy_construct(stubs, allowed, taken)?;
    let rounds = 10 * built.len();
    let mut pool = Pool::new(built, allowed, taken);
    pool.shuffle(rounds, rng);
    Some(pool.edges)
}
