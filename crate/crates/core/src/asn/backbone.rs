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

//! Noise-corrected edge significance under a hypergeometric null.

use std::collections::BTreeMap;

use log::warn;

use super::{AsnError, AsnNet};

/// Added to the null variance so that zero-variance cells stay finite.
pub const VARIANCE_PRIOR: f64 = 1.0;

/// Scores every edge by its deviation from the expected weight when edge
/// weight is drawn without replacement from node strengths.
pub fn nc_score(net: &AsnNet) -> Result<AsnNet, AsnError> {
    let total = net.total_weight();
    if total <= 0.0 {
        return Err(AsnError::ZeroWeight);
    }
    let strength = net.strengths();
    let t_star: f64 = strength.values().sum();
    let mut scored = net.clone();
    for (a, b, e) in net.edges() {
        let (si, sj) = (strength[a], strength[b]);
        let expected = si * sj / t_star;
        let variance = (expected * (1.0 - si / t_star) * (t_star - sj) / (t_star - 1.0)).max(0.0);
        scored.set_score(a, b, (e.weight - expected) / (variance + VARIANCE_PRIOR).sqrt());
    }
    Ok(scored)
}

fn incident_max(net: &AsnNet) -> Result<BTreeMap<&str, f64>, AsnError> {
    let mut best: BTreeMap<&str, f64> = net.nodes().map(|v| (v, f64::NEG_INFINITY)).collect();
    for (a, b, e) in net.edges() {
        let s = e
            .score
            .ok_or_else(|| AsnError::MissingScore(a.to_string(), b.to_string()))?;
        for v in [a, b] {
            let slot = best.get_mut(v).expect("endpoint is a node");
            *slot = slot.max(s);
        }
    }
    Ok(best)
}

/// Largest threshold at which every node keeps an edge: the minimum over
/// nodes of their best incident score.
pub fn select_delta(net: &AsnNet) -> Result<f64, AsnError> {
    let best = incident_max(net)?;
    if let Some((v, _)) = best.iter().find(|(_, s)| **s == f64::NEG_INFINITY) {
        return Err(AsnError::IsolatedNode(v.to_string()));
    }
    Ok(best.values().copied().fold(f64::INFINITY, f64::min))
}

/// Keeps the edges scoring at least `delta`. Also returns the nodes left
/// without edges, which are logged as a warning.
pub fn backbone(net: &AsnNet, delta: f64) -> Result<(AsnNet, Vec<String>), AsnError> {
    incident_max(net)?;
    let mut kept = AsnNet::new(net.nodes());
    for (a, b, e) in net.edges() {
        let s = e.score.expect("checked above");
        if s >= delta {
            kept.set_weight(a, b, e.weight);
            kept.set_score(a, b, s);
        }
    }
    kept.delta = Some(delta);
    let isolated = kept.isolated();
    if !isolated.is_empty() {
        warn!(
            "backbone at delta {delta} isolates {} node(s): {}",
            isolated.len(),
            isolated.join(", ")
        );
    }
    Ok((kept, isolated))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(edges: &[(&str, &str, f64)]) -> AsnNet {
        let mut net = AsnNet::default();
        for &(a, b, s) in edges {
            net.set_weight(a, b, 1.0);
            net.set_score(a, b, s);
        }
        net
    }

    #[test]
    fn three_node_fixture() {
        let mut net = AsnNet::default();
        net.set_weight("A", "B", 10.0);
        net.set_weight("B", "C", 1.0);
        net.set_weight("C", "A", 1.0);
        let out = nc_score(&net).unwrap();
        // Strengths A 11, B 11, C 2; T* 24.
        let score = |w: f64, si: f64, sj: f64| {
            let e = si * sj / 24.0;
            let v = e * (1.0 - si / 24.0) * (24.0 - sj) / 23.0;
            (w - e) / (v + 1.0).sqrt()
        };
        let ab = out.edge("A", "B").unwrap().score.unwrap();
        assert!((ab - score(10.0, 11.0, 11.0)).abs() < 1e-12);
        let bc = out.edge("B", "C").unwrap().score.unwrap();
        assert!((bc - score(1.0, 11.0, 2.0)).abs() < 1e-12);
        assert!(ab > 0.0);
    }

    #[test]
    fn equal_weights_equal_scores() {
        let mut net = AsnNet::default();
        let ids = ["a", "b", "c", "d", "e"];
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                net.set_weight(a, b, 3.0);
            }
        }
        let out = nc_score(&net).unwrap();
        let scores: Vec<f64> = out.edges().map(|e| e.2.score.unwrap()).collect();
        assert!(scores.iter().all(|&s| (s - scores[0]).abs() < 1e-12));
    }

    #[test]
    fn zero_weight_edge_scores_nonpositive() {
        let mut net = AsnNet::default();
        net.set_weight("a", "b", 4.0);
        net.set_weight("b", "c", 0.0);
        let out = nc_score(&net).unwrap();
        assert!(out.edge("b", "c").unwrap().score.unwrap() <= 0.0);
        assert_eq!(nc_score(&AsnNet::new(["x"])), Err(AsnError::ZeroWeight));
    }

    #[test]
    fn star_keeps_everything() {
        let net = scored(&[("hub", "x", 5.0), ("hub", "y", 3.0), ("hub", "z", 2.0)]);
        assert_eq!(select_delta(&net).unwrap(), 2.0);
        let (bb, isolated) = backbone(&net, 2.0).unwrap();
        assert_eq!(bb.edge_count(), 3);
        assert!(isolated.is_empty());
    }

    #[test]
    fn triangle_drops_weakest() {
        let net = scored(&[("A", "B", 10.0), ("B", "C", 8.0), ("C", "A", 1.0)]);
        let delta = select_delta(&net).unwrap();
        assert_eq!(delta, 8.0);
        let (bb, isolated) = backbone(&net, delta).unwrap();
        assert!(bb.edge("A", "B").is_some() && bb.edge("B", "C").is_some());
        assert!(bb.edge("A", "C").is_none());
        assert!(isolated.is_empty());
        assert_eq!(bb.delta(), Some(8.0));
    }

    #[test]
    fn extreme_thresholds() {
        let net = scored(&[("A", "B", 1.0), ("B", "C", 2.0)]);
        let (all, _) = backbone(&net, f64::NEG_INFINITY).unwrap();
        assert_eq!(all.edge_count(), 2);
        let (none, isolated) = backbone(&net, 2.5).unwrap();
        assert_eq!(none.edge_count(), 0);
        assert_eq!(isolated.len(), 3);
    }

    #[test]
    fn contract_errors() {
        let mut net = scored(&[("A", "B", 1.0)]);
        net.add_node("lonely");
        assert_eq!(select_delta(&net), Err(AsnError::IsolatedNode("lonely".into())));
        let mut unscored = AsnNet::default();
        unscored.set_weight("A", "B", 1.0);
        assert!(matches!(select_delta(&unscored), Err(AsnError::MissingScore(..))));
    }
}
