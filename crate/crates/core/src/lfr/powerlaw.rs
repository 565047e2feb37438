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

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LfrError;

/// Discrete power law `p(x) ∝ x^-exponent` on the integers `[min, max]`.
#[derive(Debug, Clone)]
pub struct PowerLaw {
    min: usize,
    cumulative: Vec<f64>,
}

impl PowerLaw {
    pub fn new(exponent: f64, min: usize, max: usize) -> Result<Self, LfrError> {
        if min < 1 || min > max {
            return Err(LfrError::EmptySupport { min, max });
        }
        if !exponent.is_finite() {
            return Err(LfrError::InvalidParams(format!(
                "power-law exponent {exponent} is not finite"
            )));
        }
        let mut total = 0.0;
        let cumulative = (min..=max)
            .map(|x| {
                total += (x as f64).powf(-exponent);
                total
            })
            .collect();
        Ok(PowerLaw { min, cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty support");
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.min + idx.min(self.cumulative.len() - 1)
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        let mut weighted = 0.0;
        for (i, &c) in self.cumulative.iter().enumerate() {
            weighted += (self.min + i) as f64 * (c - prev);
            prev = c;
        }
        weighted / prev
    }
}

/// `count` i.i.d. draws from the truncated power law, deterministic in `seed`.
pub fn sample_truncated_powerlaw(
    exponent: f64,
    x_min: usize,
    x_max: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<usize>, LfrError> {
    let law = PowerLaw::new(exponent, x_min, x_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| law.sample(&mut rng)).collect())
}

/// Lower cutoff whose truncated power-law mean on `[k_min, k_max]` is closest
/// to `target`. The mean grows monotonically with the cutoff.
pub fn solve_min_degree(exponent: f64, target: f64, k_max: usize) -> Result<usize, LfrError> {
    let mut best = (f64::INFINITY, 1);
    for k_min in 1..=k_max {
        let gap = (PowerLaw::new(exponent, k_min, k_max)?.mean() - target).abs();
        if gap < best.0 {
            best = (gap, k_min);
        }
    }
    Ok(best.1)
}
