//! Parallel sums.
//!
//! `x : y = (1/x + 1/y)^{-1}` is half the harmonic mean. Its power version
//! `x :_p y = [x^p : y^p]^{1/p}` is jointly concave for `p >= -1` and becomes
//! ordinary addition at `p = -1`.

use std::collections::HashMap;

use crate::error::{domain, Error, Result};
use crate::sympoly::{elem_sym_series, log_add_exp, PositiveVector};

/// Exponent of a power parallel sum. Never zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(f64);

impl PExponent {
    /// Range of the two-argument sum: `p >= -1`, `p != 0`.
    pub fn bivariate(p: f64) -> Result<Self> {
        if !p.is_finite() || p == 0.0 || p < -1.0 {
            return domain(format!("p-parallel sum needs p >= -1 and p != 0, got {p}"));
        }
        Ok(Self(p))
    }

    /// Range of the n-argument sum: `p > 0`.
    pub fn multivariate(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 {
            return domain(format!("multivariate p-parallel sum needs p > 0, got {p}"));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `x : y`, with `x : 0 = 0` by continuity.
pub fn par_sum(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0) || !(y >= 0.0) || x.is_infinite() || y.is_infinite() {
        return domain(format!("parallel sum needs finite x, y >= 0, got ({x}, {y})"));
    }
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    Ok((x.recip() + y.recip()).recip())
}

fn require_positive(x: f64, y: f64) -> Result<()> {
    if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        domain(format!("p-parallel sum needs finite x, y > 0, got ({x}, {y})"))
    }
}

/// `x :_p y = (x^{-p} + y^{-p})^{-1/p}`, evaluated relative to the larger
/// (for `p < 0`) or smaller (for `p > 0`) argument so nothing overflows.
pub fn p_par_sum(x: f64, y: f64, p: PExponent) -> Result<f64> {
    require_positive(x, y)?;
    let p = p.value();
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let t = lo / hi;
    let base = if p > 0.0 { lo } else { hi };
    // (1 + t^|p|)^{-1/p}
    Ok(base * (-(t.powf(p.abs())).ln_1p() / p).exp())
}

/// `[x_1^p : ... : x_n^p]^{1/p} = (sum_i x_i^{-p})^{-1/p}` for `p > 0`.
pub fn multi_p_par_sum(x: &PositiveVector, p: PExponent) -> Result<f64> {
    x.require_strict("multivariate p-parallel sum")?;
    let p = p.value();
    let xs = x.as_slice();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = xs.iter().map(|v| (lo / v).powf(p)).sum();
    Ok(lo * s.powf(-1.0 / p))
}

/// Closed-form Hessian of `(x, y) -> x :_p y`.
///
/// With `c = (x^p + y^p)^{-2-1/p}` the entries are
/// `-(p+1) x^{p-1} y^{p+1} c`, `(p+1) x^p y^p c` and `-(p+1) x^{p+1} y^{p-1} c`.
pub fn hessian_p_par_sum(x: f64, y: f64, p: PExponent) -> Result<[[f64; 2]; 2]> {
    require_positive(x, y)?;
    let p = p.value();
    let scale = p + 1.0;
    if scale == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    let (lx, ly) = (x.ln(), y.ln());
    let ln_c = (-2.0 - 1.0 / p) * log_add_exp(p * lx, p * ly);
    let term = |a: f64, b: f64| scale * (a * lx + b * ly + ln_c).exp();
    let off = term(p, p);
    Ok([
        [-term(p - 1.0, p + 1.0), off],
        [off, -term(p + 1.0, p - 1.0)],
    ])
}

/// `psi_{k,n}(x) = C(n,k-1) e_k(x) / (C(n,k) e_{k-1}(x)) = k e_k / ((n-k+1) e_{k-1})`.
pub fn anderson_psi(x: &PositiveVector, k: usize) -> Result<f64> {
    x.require_strict("psi")?;
    let n = x.len();
    if k == 0 || k > n {
        return domain(format!("psi needs 1 <= k <= n = {n}, got k = {k}"));
    }
    let series = elem_sym_series(x, k)?;
    let norm = k as f64 / (n - k + 1) as f64;
    Ok(norm * series.ratio(k, k - 1))
}

/// Largest dimension accepted by [`anderson_psi_recursive`]; the memo is keyed by subsets.
pub const RECURSIVE_PSI_MAX_N: usize = 20;

/// Evaluates `psi_{k,n}` through the parallel-sum recursion
/// `psi_{k,n}(x) = sum_j [x_j / (n-k+1)] : [psi_{k-1,n-1}(x_[j]) / (k-1)]`,
/// bottoming out at the mean `psi_{1,m}`.
pub fn anderson_psi_recursive(x: &PositiveVector, k: usize) -> Result<f64> {
    x.require_strict("psi")?;
    let n = x.len();
    if k < 2 || k > n {
        return domain(format!(
            "the psi recursion needs 2 <= k <= n = {n}, got k = {k}"
        ));
    }
    if n > RECURSIVE_PSI_MAX_N {
        return Err(Error::Refused(format!(
            "psi recursion limited to n <= {RECURSIVE_PSI_MAX_N}, got n = {n}"
        )));
    }
    let mut memo = HashMap::new();
    let full = (1u32 << n) - 1;
    psi_over_subset(x.as_slice(), full, k, &mut memo)
}

fn psi_over_subset(
    xs: &[f64],
    mask: u32,
    k: usize,
    memo: &mut HashMap<(u32, usize), f64>,
) -> Result<f64> {
    if let Some(v) = memo.get(&(mask, k)) {
        return Ok(*v);
    }
    let members: Vec<usize> = (0..xs.len()).filter(|i| mask & (1 << i) != 0).collect();
    let m = members.len();
    let value = if k == 1 {
        members.iter().map(|&i| xs[i]).sum::<f64>() / m as f64
    } else {
        let mut total = 0.0;
        for &j in &members {
            let rest = psi_over_subset(xs, mask & !(1 << j), k - 1, memo)?;
            total += par_sum(xs[j] / (m - k + 1) as f64, rest / (k - 1) as f64)?;
        }
        total
    };
    memo.insert((mask, k), value);
    Ok(value)
}
