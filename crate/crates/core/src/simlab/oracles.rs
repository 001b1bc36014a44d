//! Brute-force and Monte Carlo references for the null win-run quantities
//! behind the correction bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MeanSe;
use crate::error::{Error, Result};

/// Distribution of the number of wins ranked above the first loss, over all
/// equally likely interleavings of `k1` wins and `k2` losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDistribution {
    /// `counts[k]` interleavings lead with exactly `k` wins.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl DeltaDistribution {
    pub fn pmf(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn mean(&self) -> f64 {
        let s: u64 = self.counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        s as f64 / self.total as f64
    }
}

/// Enumerates every placement of the `k2` losses among `k1 + k2` slots.
pub fn delta_oracle(k1: usize, k2: usize) -> Result<DeltaDistribution> {
    let n = k1 + k2;
    if n > 30 {
        return Err(Error::InvalidParameter(format!(
            "enumeration limited to k1 + k2 <= 30, got {n}"
        )));
    }
    let mut counts = vec![0u64; k1 + 1];
    let mut total = 0u64;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize != k2 {
            continue;
        }
        // bit t set means slot t holds a loss
        let lead = if mask == 0 { n } else { mask.trailing_zeros() as usize };
        counts[lead] += 1;
        total += 1;
    }
    Ok(DeltaDistribution { counts, total })
}

/// Monte Carlo estimate of `E[max_{k <= n} S_k / (k - S_k + 1)]` for a
/// walk `S_k` with win probability `r / (1 + r)`.
pub fn max_ratio_oracle(r: f64, n: usize, samples: usize, seed: u64) -> Result<MeanSe> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSymmetry(r));
    }
    if n == 0 || samples == 0 {
        return Err(Error::InvalidParameter("n and samples must be positive".into()));
    }
    let q = r / (1.0 + r);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ s as u64);
            let (mut wins, mut best) = (0usize, 0.0f64);
            for k in 1..=n {
                if rng.random_bool(q) {
                    wins += 1;
                    best = best.max(wins as f64 / (k - wins + 1) as f64);
                }
            }
            best
        })
        .collect();
    Ok(MeanSe::of(&values))
}
