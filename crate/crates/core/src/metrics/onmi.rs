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

//! Overlapping normalized mutual information.
//!
//! Two disjoint partitions are compared through their contingency table, so
//! every variant coincides with the classical NMI under the matching
//! normalization. As soon as one side overlaps, each community is treated
//! as a binary indicator vector and matched against its best admissible
//! counterpart on the other side.

use std::fmt;
use std::str::FromStr;

use super::{plogp, MetricsError};
use crate::graph::Cover;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OnmiVariant {
    /// Mutual information over the larger of the two entropies.
    Max,
    /// Average normalized conditional entropy.
    Lfk,
    /// Mutual information over the mean of the two entropies.
    Sum,
}

impl OnmiVariant {
    pub const ALL: [OnmiVariant; 3] = [OnmiVariant::Max, OnmiVariant::Lfk, OnmiVariant::Sum];

    pub fn as_str(self) -> &'static str {
        match self {
            OnmiVariant::Max => "MAX",
            OnmiVariant::Lfk => "LFK",
            OnmiVariant::Sum => "SUM",
        }
    }
}

impl fmt::Display for OnmiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OnmiVariant {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MAX" => Ok(OnmiVariant::Max),
            "LFK" => Ok(OnmiVariant::Lfk),
            "SUM" => Ok(OnmiVariant::Sum),
            _ => Err(MetricsError::UnknownVariant(s.to_string())),
        }
    }
}

/// Similarity in `[0, 1]` between two covers of the same node set.
pub fn onmi(x: &Cover, y: &Cover, variant: OnmiVariant) -> Result<f64, MetricsError> {
    let n = x.node_count();
    if n != y.node_count() {
        return Err(MetricsError::SizeMismatch(n, y.node_count()));
    }
    if n == 0 {
        return Err(MetricsError::EmptyUniverse);
    }
    // Exact, so that equal covers tie with each other in top-k rankings.
    if x.same_as(y) {
        return Ok(1.0);
    }
    let value = match (x.labels(), y.labels()) {
        (Some(lx), Some(ly)) => partition_nmi(&lx, &ly, x, y, variant),
        _ => cover_nmi(x, y, variant),
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Entropy in bits of a distribution given by integer counts summing to `n`.
fn count_entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    let s: f64 = counts.map(|c| plogp(c as f64)).sum();
    n.log2() - s / n
}

fn partition_nmi(lx: &[usize], ly: &[usize], x: &Cover, y: &Cover, variant: OnmiVariant) -> f64 {
    let n = lx.len() as f64;
    let hx = count_entropy(x.communities().iter().map(Vec::len), n);
    let hy = count_entropy(y.communities().iter().map(Vec::len), n);
    if hx == 0.0 && hy == 0.0 {
        return 1.0;
    }
    if hx == 0.0 || hy == 0.0 {
        return 0.0;
    }
    let mut cells: Vec<(usize, usize)> = lx.iter().copied().zip(ly.iter().copied()).collect();
    cells.sort_unstable();
    let mut joint_counts = Vec::new();
    let mut run = 0;
    for i in 0..cells.len() {
        run += 1;
        if i + 1 == cells.len() || cells[i + 1] != cells[i] {
            joint_counts.push(run);
            run = 0;
        }
    }
    let hxy = count_entropy(joint_counts.into_iter(), n);
    let mi = hx + hy - hxy;
    match variant {
        OnmiVariant::Max => mi / hx.max(hy),
        OnmiVariant::Sum => 2.0 * mi / (hx + hy),
        OnmiVariant::Lfk => 1.0 - 0.5 * ((hx - mi) / hx + (hy - mi) / hy),
    }
}

fn binary_entropy(size: usize, n: usize) -> f64 {
    let p = size as f64 / n as f64;
    -(plogp(p) + plogp(1.0 - p))
}

/// Per-community best conditional entropies `H*(A_k | B)` of `a` given `b`.
fn conditional_entropies(a: &Cover, b: &Cover, inter: &dyn Fn(usize, usize) -> usize, hb: &[f64]) -> Vec<f64> {
    let n = a.node_count();
    let nf = n as f64;
    a.communities()
        .iter()
        .enumerate()
        .map(|(k, ak)| {
            let size_a = ak.len();
            let h_ak = binary_entropy(size_a, n);
            let mut best = h_ak;
            for (l, bl) in b.communities().iter().enumerate() {
                let size_b = bl.len();
                let c = inter(k, l);
                let p11 = c as f64 / nf;
                let p10 = (size_a - c) as f64 / nf;
                let p01 = (size_b - c) as f64 / nf;
                let p00 = (n + c - size_a - size_b) as f64 / nf;
                let (h11, h10, h01, h00) = (-plogp(p11), -plogp(p10), -plogp(p01), -plogp(p00));
                if h11 + h00 >= h01 + h10 {
                    let cond = (h11 + h10 + h01 + h00) - hb[l];
                    if cond < best {
                        best = cond;
                    }
                }
            }
            best
        })
        .collect()
}

fn cover_nmi(x: &Cover, y: &Cover, variant: OnmiVariant) -> f64 {
    let n = x.node_count();
    let kx = x.len();
    let ky = y.len();
    let mut inter = vec![0usize; kx * ky];
    let xs = x.node_communities();
    let ys = y.node_communities();
    for v in 0..n {
        for &k in &xs[v] {
            for &l in &ys[v] {
                inter[k * ky + l] += 1;
            }
        }
    }
    let hx: Vec<f64> = x.communities().iter().map(|c| binary_entropy(c.len(), n)).collect();
    let hy: Vec<f64> = y.communities().iter().map(|c| binary_entropy(c.len(), n)).collect();
    let hx_total: f64 = hx.iter().sum();
    let hy_total: f64 = hy.iter().sum();

    if hx_total == 0.0 && hy_total == 0.0 {
        return if x.same_as(y) { 1.0 } else { 0.0 };
    }

    let x_given_y = conditional_entropies(x, y, &|k, l| inter[k * ky + l], &hy);
    let y_given_x = conditional_entropies(y, x, &|l, k| inter[k * ky + l], &hx);

    match variant {
        OnmiVariant::Lfk => {
            let y_has_whole = y.communities().iter().any(|c| c.len() == n);
            let x_has_whole = x.communities().iter().any(|c| c.len() == n);
            let mean_ratio = |cond: &[f64], h: &[f64], other_has_whole: bool| -> f64 {
                let total: f64 = cond
                    .iter()
                    .zip(h)
                    .map(|(&c, &hk)| {
                        if hk > 0.0 {
                            c / hk
                        } else if other_has_whole {
                            0.0
                        } else {
                            1.0
                        }
                    })
                    .sum();
                total / cond.len() as f64
            };
            1.0 - 0.5 * (mean_ratio(&x_given_y, &hx, y_has_whole) + mean_ratio(&y_given_x, &hy, x_has_whole))
        }
        OnmiVariant::Max | OnmiVariant::Sum => {
            let hxy: f64 = x_given_y.iter().sum();
            let hyx: f64 = y_given_x.iter().sum();
            let mi = 0.5 * ((hx_total - hxy) + (hy_total - hyx));
            match variant {
                OnmiVariant::Max => mi / hx_total.max(hy_total),
                _ => mi / (0.5 * (hx_total + hy_total)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(n: usize, cs: &[&[usize]]) -> Cover {
        Cover::new(n, cs.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn self_similarity_is_one() {
        let covers = [
            cover(6, &[&[0, 1, 2], &[3, 4, 5]]),
            cover(6, &[&[0, 1, 2, 3], &[2, 3, 4, 5]]),
            cover(5, &[&[0, 1], &[1, 2], &[2, 3, 4]]),
        ];
        for c in &covers {
            for v in OnmiVariant::ALL {
                assert!((onmi(c, c, v).unwrap() - 1.0).abs() < 1e-12, "{v} {c:?}");
            }
        }
    }

    #[test]
    fn crossing_halves_share_nothing() {
        let x = cover(4, &[&[0, 1], &[2, 3]]);
        let y = cover(4, &[&[0, 2], &[1, 3]]);
        for v in OnmiVariant::ALL {
            assert!(onmi(&x, &y, v).unwrap().abs() < 1e-12);
        }
        // The indicator machinery agrees on this pair.
        assert!(cover_nmi(&x, &y, OnmiVariant::Max).abs() < 1e-12);
    }

    #[test]
    fn degenerate_entropy() {
        let whole = Cover::whole(4);
        assert_eq!(onmi(&whole, &whole, OnmiVariant::Max).unwrap(), 1.0);
        let halves = cover(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(onmi(&whole, &halves, OnmiVariant::Max).unwrap(), 0.0);
        let doubled = cover(4, &[&[0, 1, 2, 3], &[0, 1, 2, 3]]);
        assert_eq!(onmi(&doubled, &doubled, OnmiVariant::Lfk).unwrap(), 1.0);
        assert_eq!(onmi(&doubled, &whole, OnmiVariant::Max).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = Cover::singletons(3);
        let b = Cover::singletons(4);
        assert_eq!(onmi(&a, &b, OnmiVariant::Max), Err(MetricsError::SizeMismatch(3, 4)));
        let e = Cover::singletons(0);
        assert_eq!(onmi(&e, &e, OnmiVariant::Max), Err(MetricsError::EmptyUniverse));
        assert!("max".parse::<OnmiVariant>().is_ok());
        assert!("nmi".parse::<OnmiVariant>().is_err());
    }

    #[test]
    fn overlapping_is_symmetric_and_max_below_sum() {
        let x = cover(8, &[&[0, 1, 2, 3], &[3, 4, 5], &[5, 6, 7]]);
        let y = cover(8, &[&[0, 1, 2], &[2, 3, 4, 5, 6], &[6, 7]]);
        for v in OnmiVariant::ALL {
            let a = onmi(&x, &y, v).unwrap();
            let b = onmi(&y, &x, v).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!(a > 0.0 && a < 1.0);
        }
        assert!(onmi(&x, &y, OnmiVariant::Max).unwrap() <= onmi(&x, &y, OnmiVariant::Sum).unwrap());
    }
}
