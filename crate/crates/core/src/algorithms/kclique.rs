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

//! k-clique percolation.

use std::collections::BTreeSet;

use crate::graph::{Cover, Graph, NodeId};

/// Maximal cliques by Bron–Kerbosch with pivoting.
pub(super) fn maximal_cliques(graph: &Graph) -> Vec<Vec<NodeId>> {
    let n = graph.node_count();
    let adj: Vec<BTreeSet<NodeId>> = (0..n).map(|v| graph.neighbor_ids(v).collect()).collect();
    let mut out = Vec::new();
    let mut r = Vec::new();
    bron_kerbosch(&adj, &mut r, (0..n).collect(), BTreeSet::new(), &mut out);
    out.sort();
    out
}

fn bron_kerbosch(
    adj: &[BTreeSet<NodeId>],
    r: &mut Vec<NodeId>,
    mut p: BTreeSet<NodeId>,
    mut x: BTreeSet<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            let mut clique = r.clone();
            clique.sort_unstable();
            out.push(clique);
        }
        return;
    }
    let pivot = *p
        .union(&x)
        .max_by_key(|&&u| (p.intersection(&adj[u]).count(), std::cmp::Reverse(u)))
        .expect("non-empty");
    let candidates: Vec<NodeId> = p.difference(&adj[pivot]).copied().collect();
    for v in candidates {
        r.push(v);
        let np = p.intersection(&adj[v]).copied().collect();
        let nx = x.intersection(&adj[v]).copied().collect();
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Unions of k-cliques reachable through shared (k-1)-subsets. Nodes in no
/// k-clique become singletons.
pub(super) fn clique_percolation(graph: &Graph, k: usize) -> Cover {
    let cliques: Vec<Vec<NodeId>> = maximal_cliques(graph).into_iter().filter(|c| c.len() >= k).collect();
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            let shared = cliques[i]
                .iter()
                .filter(|v| cliques[j].binary_search(v).is_ok())
                .count();
            if shared + 1 >= k {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); cliques.len()];
    for (i, c) in cliques.iter().enumerate() {
        let root = find(&mut parent, i);
        groups[root].extend(c.iter().copied());
    }
    let communities = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| g.into_iter().collect())
        .collect();
    Cover::new(graph.node_count(), communities).expect("clique members are graph nodes")
}
