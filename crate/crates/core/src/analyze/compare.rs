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

//! Edge-weight distributions and comparisons between networks.

use std::collections::BTreeSet;

use super::AnalyzeError;
use crate::asn::AsnNet;

/// `(w, P(W >= w))` at every distinct weight, ascending in `w`.
pub fn ccdf(weights: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    for (i, &w) in sorted.iter().enumerate() {
        if i == 0 || sorted[i - 1] != w {
            out.push((w, (sorted.len() - i) as f64 / n));
        }
    }
    out
}

/// Pearson correlation of edge weights over pairs weighted in either
/// network, with a missing edge counting as zero.
pub fn weight_correlation(a: &AsnNet, b: &AsnNet) -> Result<f64, AnalyzeError> {
    if !a.nodes().eq(b.nodes()) {
        return Err(AnalyzeError::NodeMismatch);
    }
    let pairs: BTreeSet<(&str, &str)> = a
        .edges()
        .chain(b.edges())
        .filter(|e| e.2.weight != 0.0)
        .map(|e| (e.0, e.1))
        .collect();
    if pairs.len() < 2 {
        return Err(AnalyzeError::TooFewPairs(pairs.len()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| a.weight(p.0, p.1)).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| b.weight(p.0, p.1)).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyzeError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccdf_fixtures() {
        assert_eq!(ccdf(&[1.0, 1.0, 10.0]), vec![(1.0, 1.0), (10.0, 1.0 / 3.0)]);
        assert_eq!(ccdf(&[4.0, 4.0]), vec![(4.0, 1.0)]);
        assert!(ccdf(&[]).is_empty());
    }

    fn net(edges: &[(&str, &str, f64)]) -> AsnNet {
        let mut n = AsnNet::new(["a", "b", "c", "d"]);
        for &(x, y, w) in edges {
            n.set_weight(x, y, w);
        }
        n
    }

    #[test]
    fn linear_invariance() {
        let a = net(&[("a", "b", 1.0), ("b", "c", 4.0), ("c", "d", 2.0)]);
        let b = net(&[("a", "b", 2.0), ("b", "c", 8.0), ("c", "d", 4.0)]);
        assert!((weight_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((weight_correlation(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_fill_against_hand_value() {
        // Pairs ab, bc, cd: x = (1, 2, 0), y = (0, 2, 1).
        let a = net(&[("a", "b", 1.0), ("b", "c", 2.0)]);
        let b = net(&[("b", "c", 2.0), ("c", "d", 1.0)]);
        // Both means are 1: sxy = 1, sxx = syy = 2.
        assert!((weight_correlation(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = net(&[("a", "b", 1.0)]);
        assert_eq!(weight_correlation(&a, &a), Err(AnalyzeError::TooFewPairs(1)));
        let flat = net(&[("a", "b", 1.0), ("c", "d", 1.0)]);
        assert_eq!(weight_correlation(&flat, &flat), Err(AnalyzeError::ZeroVariance));
        let other = AsnNet::new(["x"]);
        assert_eq!(weight_correlation(&a, &other), Err(AnalyzeError::NodeMismatch));
    }
}
