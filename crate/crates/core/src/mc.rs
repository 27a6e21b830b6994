//! Monte Carlo estimate of `h_k` from `h_k(x) = E[(xi . x)^k] / k!` with
//! independent standard exponential `xi_i`.
//!
//! Samples are drawn in fixed-size blocks, each from its own derived stream.
//! Blocks are accumulated with Welford's update and merged in block order,
//! so the estimate does not depend on the thread count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::map_indexed;
use crate::seed::trial_rng;
use crate::sympoly::PositiveVector;

/// Samples per block.
pub const BLOCK: u64 = 1 << 14;

/// Largest `k` accepted by the command line front end.
pub const CLI_K_MAX: usize = 8;

/// `-ln(1 - u)` for `u` uniform in `[0, 1)`.
pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub k: usize,
}

impl McEstimate {
    /// `(mean - exact) / std_error`; zero when both the error and the gap vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        let gap = self.mean - exact;
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

/// Running mean and centered sum of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let (na, nb, nf) = (self.count as f64, other.count as f64, n as f64);
        let delta = other.mean - self.mean;
        Welford {
            count: n,
            mean: self.mean + delta * (nb / nf),
            m2: self.m2 + other.m2 + delta * delta * (na * nb / nf),
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Estimates `h_k(x)` from `samples` draws.
pub fn estimate_hk(x: &PositiveVector, k: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return domain(format!("need at least 2 samples, got {samples}"));
    }
    if k == 0 {
        return Ok(McEstimate { mean: 1.0, std_error: 0.0, samples, k });
    }
    let xs = x.as_slice();
    let inv_fact = (-ln_factorial(k)).exp();
    let blocks = samples.div_ceil(BLOCK);
    let partials = map_indexed(blocks as usize, |b| {
        let b = b as u64;
        let count = BLOCK.min(samples - b * BLOCK);
        let mut rng = trial_rng(seed, "mc", &[b]);
        let mut acc = Welford::default();
        for _ in 0..count {
            let s: f64 = xs.iter().map(|xi| sample_exponential(&mut rng) * xi).sum();
            let v = s.powi(k as i32) * inv_fact;
            if !v.is_finite() {
                return Err(Error::Overflow(format!(
                    "(xi . x)^{k} overflowed; rescale x to unit norm and multiply the estimate by ||x||^{k}"
                )));
            }
            acc.push(v);
        }
        Ok(acc)
    });
    let mut total = Welford::default();
    for p in partials {
        total = total.merge(p?);
    }
    let std_error = (total.sample_variance() / samples as f64).sqrt();
    Ok(McEstimate { mean: total.mean, std_error, samples, k })
}
