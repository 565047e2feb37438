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

use super::{GraphError, NodeId};

/// A set of possibly overlapping communities over nodes `0..n`.
///
/// Every community is non-empty and sorted, and every node belongs to at
/// least one community: nodes left out at construction are appended as
/// singletons. Duplicate communities are kept, they matter for overlapping
/// modularity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cover {
    n: usize,
    communities: Vec<Vec<NodeId>>,
}

impl Cover {
    pub fn new(n: usize, communities: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        let mut covered = vec![false; n];
        let mut out = Vec::with_capacity(communities.len());
        for mut c in communities {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                continue;
            }
            if let Some(&node) = c.last().filter(|&&node| node >= n) {
                return Err(GraphError::OutOfRange { line: 0, node, n });
            }
            for &v in &c {
                covered[v] = true;
            }
            out.push(c);
        }
        out.extend(covered.iter().enumerate().filter(|(_, &c)| !c).map(|(v, _)| vec![v]));
        Ok(Cover { n, communities: out })
    }

    /// Partition from a per-node label vector; community order follows the
    /// first node carrying each label.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut index: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut communities: Vec<Vec<NodeId>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            let next = communities.len();
            let k = *index.entry(l).or_insert(next);
            if k == next {
                communities.push(Vec::new());
            }
            communities[k].push(v);
        }
        Cover {
            n: labels.len(),
            communities,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Cover {
            n,
            communities: (0..n).map(|v| vec![v]).collect(),
        }
    }

    /// Every node in one community (no communities at all when `n == 0`).
    pub fn whole(n: usize) -> Self {
        Cover {
            n,
            communities: if n == 0 { vec![] } else { vec![(0..n).collect()] },
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[Vec<NodeId>] {
        &self.communities
    }

    /// Membership count `s_i` of every node.
    pub fn memberships(&self) -> Vec<usize> {
        let mut s = vec![0; self.n];
        for c in &self.communities {
            for &v in c {
                s[v] += 1;
            }
        }
        s
    }

    /// Indices of the communities containing each node.
    pub fn node_communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (k, c) in self.communities.iter().enumerate() {
            for &v in c {
                out[v].push(k);
            }
        }
        out
    }

    pub fn total_membership(&self) -> usize {
        self.communities.iter().map(Vec::len).sum()
    }

    /// Pairwise disjoint and exhaustive.
    pub fn is_partition(&self) -> bool {
        self.total_membership() == self.n && self.memberships().iter().all(|&s| s == 1)
    }

    /// Per-node community index, or `None` for overlapping covers.
    pub fn labels(&self) -> Option<Vec<usize>> {
        if !self.is_partition() {
            return None;
        }
        let mut labels = vec![0; self.n];
        for (k, c) in self.communities.iter().enumerate() {
            for &v in c {
                labels[v] = k;
            }
        }
        Some(labels)
    }

    /// Communities sorted lexicographically, hence by smallest member first.
    pub fn canonical(&self) -> Cover {
        let mut communities = self.communities.clone();
        communities.sort();
        Cover { n: self.n, communities }
    }

    /// Equality up to community order.
    pub fn same_as(&self, other: &Cover) -> bool {
        self.n == other.n && self.canonical().communities == other.canonical().communities
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncovered_nodes_become_singletons() {
        let c = Cover::new(3, vec![vec![1, 0, 1]]).unwrap();
        assert_eq!(c.communities(), &[vec![0, 1], vec![2]]);
        assert!(c.is_partition());
    }

    #[test]
    fn overlap_memberships() {
        let c = Cover::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert_eq!(c.memberships(), vec![1, 2, 2, 1]);
        assert!(!c.is_partition());
        assert!(c.labels().is_none());
        let total: usize = c.memberships().iter().sum();
        assert_eq!(total, c.total_membership());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Cover::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn from_labels_orders_by_first_node() {
        let c = Cover::from_labels(&[7, 3, 7, 3, 9]);
        assert_eq!(c.communities(), &[vec![0, 2], vec![1, 3], vec![4]]);
        assert_eq!(c.labels().unwrap(), vec![0, 1, 0, 1, 2]);
    }

    #[test]
    fn duplicate_communities_are_kept() {
        let c = Cover::new(3, vec![vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.memberships(), vec![2, 2, 2]);
    }
}
