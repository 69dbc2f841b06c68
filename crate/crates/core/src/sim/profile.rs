use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::seed;

/// Piecewise-constant mean: regime `k` (between consecutive change points)
/// has `support_size` nonzero coordinates equal to `deltas[k]` times a random
/// sign. Each regime draws its own support and signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanProfile {
    /// Sorted 1-based change points; regime `k + 1` starts at `change_points[k] + 1`.
    pub change_points: Vec<usize>,
    /// One magnitude per regime, `change_points.len() + 1` in total.
    pub deltas: Vec<f64>,
    /// Number of nonzero coordinates; `None` means `floor(p^0.7)`.
    pub support_size: Option<usize>,
    pub sign_seed: u64,
}

impl MeanProfile {
    pub fn null() -> Self {
        Self { change_points: Vec::new(), deltas: vec![0.0], support_size: None, sign_seed: 0 }
    }

    /// Zero mean up to `tau`, magnitude `delta` afterwards.
    pub fn single(tau: usize, delta: f64, sign_seed: u64) -> Self {
        Self { change_points: vec![tau], deltas: vec![0.0, delta], support_size: None, sign_seed }
    }

    pub fn is_null(&self) -> bool {
        self.deltas.iter().all(|&d| d == 0.0)
    }

    pub fn default_support(p: usize) -> usize {
        (p as f64).powf(0.7).floor() as usize
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if self.deltas.len() != self.change_points.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} change points need {} regime magnitudes, got {}",
                self.change_points.len(),
                self.change_points.len() + 1,
                self.deltas.len()
            )));
        }
        if self.change_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("change points must be strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (self.change_points.first(), self.change_points.last()) {
            if first < 1 || last >= n {
                return Err(Error::InvalidConfig(format!("change points must lie in 1..={}", n - 1)));
            }
        }
        if self.support_size.is_some_and(|k| k > p) {
            return Err(Error::InvalidConfig("support larger than dimension".into()));
        }
        Ok(())
    }

    /// `n x p` matrix of means, row `i - 1` holding `mu_i`.
    pub fn means(&self, n: usize, p: usize) -> Result<DMatrix<f64>> {
        self.validate(n, p)?;
        let mut out = DMatrix::zeros(n, p);
        if self.is_null() {
            return Ok(out);
        }
        let k = self.support_size.unwrap_or_else(|| Self::default_support(p));
        let mut start = 0;
        for (regime, &delta) in self.deltas.iter().enumerate() {
            let end = self.change_points.get(regime).copied().unwrap_or(n);
            if delta != 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.sign_seed, seed::PROFILE, regime as u64));
                for j in sample(&mut rng, p, k).into_vec() {
                    let value = if rng.random::<bool>() { delta } else { -delta };
                    out.rows_mut(start, end - start).column_mut(j).fill(value);
                }
            }
            start = end;
        }
        Ok(out)
    }
}
