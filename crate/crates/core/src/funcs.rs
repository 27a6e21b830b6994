//! Ratio and root functionals of `e_k` and `h_k`.
//!
//! Every functional is evaluated from a [`LogSeries`](crate::sympoly::LogSeries)
//! of `x^p`, so ratios are differences of logarithms and never quotients of
//! overflowed values.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::parsum::{p_par_sum, PExponent};
use crate::sympoly::{
    complete_hom_series_pow, elem_sym, elem_sym_series_pow, PositiveVector,
};

fn require_degree(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        domain(format!("need 1 <= k <= n = {n}, got k = {k}"))
    } else {
        Ok(())
    }
}

fn require_positive_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        domain(format!("need p > 0, got p = {p}"))
    }
}

fn require_hom_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        domain(format!("need p >= 1, got p = {p}"))
    }
}

/// `phi_{k,n}(x) = [e_k(x^p) / e_{k-1}(x^p)]^{1/p}`.
pub fn phi(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    x.require_strict("phi")?;
    require_degree(k, x.len())?;
    require_positive_p(p)?;
    let s = elem_sym_series_pow(x, p, k)?;
    if p == 1.0 {
        return Ok(s.ratio(k, k - 1));
    }
    Ok((s.ln_ratio(k, k - 1) / p).exp())
}

/// `[e_k(x^p)]^{1/(pk)}`. Zero entries are allowed.
pub fn elem_root(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    require_degree(k, x.len())?;
    require_positive_p(p)?;
    let s = elem_sym_series_pow(x, p, k)?;
    Ok((s.ln(k) / (p * k as f64)).exp())
}

/// `Phi_{k,l,n}(x) = [e_k(x^p) / e_{k-l}(x^p)]^{1/(lp)}`.
pub fn big_phi(x: &PositiveVector, k: usize, l: usize, p: f64) -> Result<f64> {
    x.require_strict("Phi")?;
    require_degree(k, x.len())?;
    if l == 0 || l > k {
        return domain(format!("need 1 <= l <= k = {k}, got l = {l}"));
    }
    require_positive_p(p)?;
    let s = elem_sym_series_pow(x, p, k)?;
    if p == 1.0 && l == 1 {
        return Ok(s.ratio(k, k - 1));
    }
    Ok((s.ln_ratio(k, k - l) / (l as f64 * p)).exp())
}

/// `[h_k(x^p)]^{1/(pk)}` for `k >= 1`, `p >= 1`.
pub fn hom_root(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    if k == 0 {
        return domain("hom_root needs k >= 1");
    }
    require_hom_p(p)?;
    let s = complete_hom_series_pow(x, p, k)?;
    Ok((s.ln(k) / (p * k as f64)).exp())
}

/// `[h_k(x^p) / h_1(x^p)]^{1/(p(k-1))}` for `k >= 2`, `p >= 1`.
pub fn hom_ratio(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    x.require_strict("hom_ratio")?;
    if k < 2 {
        return domain(format!("hom_ratio needs k >= 2, got k = {k}"));
    }
    require_hom_p(p)?;
    let s = complete_hom_series_pow(x, p, k)?;
    Ok((s.ln_ratio(k, 1) / (p * (k - 1) as f64)).exp())
}

/// `1 / e_k(x^p)` for `p` in `(-1, 0)`.
pub fn recip_elem(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    x.require_strict("recip_elem")?;
    require_degree(k, x.len())?;
    if !(p > -1.0 && p < 0.0) {
        return domain(format!("recip_elem needs p in (-1, 0), got p = {p}"));
    }
    Ok((-elem_sym_series_pow(x, p, k)?.ln(k)).exp())
}

/// The classical ratio `e_k(x) / e_{k-1}(x)`, computed directly from the
/// linear-domain recurrence (a separate route from [`phi`]).
pub fn marcus_lopes_ratio(x: &PositiveVector, k: usize) -> Result<f64> {
    x.require_strict("e_k / e_(k-1)")?;
    require_degree(k, x.len())?;
    Ok(elem_sym(x, k)? / elem_sym(x, k - 1)?)
}

/// `phi_{k,n}` rebuilt from parallel sums over deleted-coordinate vectors:
/// `phi_k(x) = (sum_j g_j(x)^p)^{1/p}` with
/// `g_j = (a x_j) :_p (a phi_{k-1}(x_[j]))` and `a = k^{-1/p}`.
pub fn phi_via_parallel_sums(x: &PositiveVector, k: usize, p: f64) -> Result<f64> {
    x.require_strict("phi")?;
    require_degree(k, x.len())?;
    require_positive_p(p)?;
    if k < 2 {
        return domain("the parallel-sum form of phi needs k >= 2");
    }
    let scale = (k as f64).powf(-1.0 / p);
    let exponent = PExponent::bivariate(p)?;
    let mut total = 0.0;
    for (j, &xj) in x.as_slice().iter().enumerate() {
        let rest = x.without(j).expect("k >= 2 implies n >= 2");
        let g = p_par_sum(scale * xj, scale * phi(&rest, k - 1, p)?, exponent)?;
        total += g.powf(p);
    }
    Ok(total.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RatioKind {
    ElemRatio,
    ElemRoot,
    HomRoot,
    HomRatio,
    RecipElem,
}

/// A functional together with the parameter range of the theorem it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub kind: RatioKind,
    pub k: usize,
    #[serde(default = "default_l")]
    pub l: usize,
    pub p: f64,
}

fn default_l() -> usize {
    1
}

impl RatioSpec {
    pub fn new(kind: RatioKind, k: usize, l: usize, p: f64) -> Self {
        Self { kind, k, l, p }
    }

    /// Checks the theorem hypotheses for dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let Self { kind, k, l, p } = *self;
        if l == 0 || l > k {
            return domain(format!("need 1 <= l <= k, got l = {l}, k = {k}"));
        }
        match kind {
            RatioKind::ElemRatio | RatioKind::ElemRoot | RatioKind::RecipElem if k > n => {
                return domain(format!("need k <= n = {n}, got k = {k}"));
            }
            RatioKind::HomRatio if k < 2 => return domain("HOM_RATIO needs k >= 2"),
            _ => {}
        }
        let ok = match kind {
            RatioKind::ElemRatio | RatioKind::ElemRoot => p > 0.0 && p <= 1.0,
            RatioKind::HomRoot | RatioKind::HomRatio => p >= 1.0,
            RatioKind::RecipElem => p > -1.0 && p < 0.0,
        };
        if !ok || !p.is_finite() {
            return domain(format!("p = {p} is outside the range for {kind:?}"));
        }
        Ok(())
    }

    /// Validates and evaluates. `ElemRatio` with `l > 1` is `Phi_{k,l,n}`.
    pub fn evaluate(&self, x: &PositiveVector) -> Result<f64> {
        self.validate(x.len())?;
        let Self { kind, k, l, p } = *self;
        match kind {
            RatioKind::ElemRatio if l == 1 => phi(x, k, p),
            RatioKind::ElemRatio => big_phi(x, k, l, p),
            RatioKind::ElemRoot => elem_root(x, k, p),
            RatioKind::HomRoot => hom_root(x, k, p),
            RatioKind::HomRatio => hom_ratio(x, k, p),
            RatioKind::RecipElem => recip_elem(x, k, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> PositiveVector {
        PositiveVector::from_slice(xs).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn phi_examples() {
        let x = v(&[0.5, 2.0, 7.0]);
        let p = 0.3;
        let want = x.as_slice().iter().map(|t| t.powf(p)).sum::<f64>().powf(1.0 / p);
        assert!(close(phi(&x, 1, p).unwrap(), want, 1e-13));
        assert!(close(phi(&v(&[1.0, 2.0, 3.0]), 2, 1.0).unwrap(), 11.0 / 6.0, 1e-14));
        // Constant vector: c ((n-k+1)/k)^{1/p}.
        let c = 2.5;
        let got = phi(&PositiveVector::constant(5, c).unwrap(), 3, 0.4).unwrap();
        assert!(close(got, c * (3.0f64 / 3.0).powf(1.0 / 0.4), 1e-13));
        let got = phi(&PositiveVector::constant(5, c).unwrap(), 2, 0.4).unwrap();
        assert!(close(got, c * (4.0f64 / 2.0).powf(1.0 / 0.4), 1e-13));
        assert!(close(phi(&PositiveVector::constant(3, 1.0).unwrap(), 2, 1.0).unwrap(), 1.0, 1e-14));
        assert!(phi(&v(&[1.0, 0.0]), 1, 0.5).is_err());
        assert!(phi(&v(&[1.0, 2.0]), 3, 0.5).is_err());
        assert!(phi(&v(&[1.0, 2.0]), 1, 0.0).is_err());
    }

    #[test]
    fn elem_root_examples() {
        assert!(close(elem_root(&v(&[1.0, 1.0, 1.0]), 2, 1.0).unwrap(), 3f64.sqrt(), 1e-14));
        assert!(close(elem_root(&v(&[1.0, 2.0, 3.0]), 3, 1.0).unwrap(), 6f64.cbrt(), 1e-14));
        assert!(close(elem_root(&v(&[4.0, 4.0]), 2, 0.5).unwrap(), 4.0, 1e-14));
        assert_eq!(elem_root(&v(&[0.0, 4.0]), 2, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn big_phi_examples() {
        let x = v(&[0.2, 1.5, 3.0, 9.0]);
        assert!(close(big_phi(&x, 3, 1, 0.6).unwrap(), phi(&x, 3, 0.6).unwrap(), 1e-14));
        assert!(close(big_phi(&v(&[1.0, 2.0, 3.0]), 3, 3, 1.0).unwrap(), 6f64.cbrt(), 1e-14));
        assert!(close(big_phi(&v(&[1.0, 2.0, 3.0]), 2, 2, 1.0).unwrap(), 11f64.sqrt(), 1e-14));
        assert!(big_phi(&x, 2, 3, 0.5).is_err());
    }

    #[test]
    fn hom_examples() {
        assert!(close(hom_root(&v(&[1.0, 1.0]), 2, 1.0).unwrap(), 3f64.sqrt(), 1e-14));
        assert!(close(hom_root(&v(&[1.0, 2.0]), 2, 1.0).unwrap(), 7f64.sqrt(), 1e-14));
        for (k, p) in [(1, 1.0), (4, 2.5), (7, 1.0)] {
            assert!(close(hom_root(&v(&[2.0]), k, p).unwrap(), 2.0, 1e-14));
        }
        assert!(close(hom_ratio(&v(&[1.0, 1.0]), 2, 1.0).unwrap(), 1.5, 1e-14));
        assert!(close(hom_ratio(&v(&[5.0]), 3, 2.0).unwrap(), 5.0, 1e-14));
        assert!(close(hom_ratio(&v(&[1.0, 2.0]), 2, 1.0).unwrap(), 7.0 / 3.0, 1e-14));
        assert!(hom_root(&v(&[1.0]), 2, 0.5).is_err());
        assert!(hom_ratio(&v(&[1.0, 2.0]), 1, 1.0).is_err());
    }

    #[test]
    fn recip_examples() {
        assert!(close(recip_elem(&v(&[1.0, 1.0]), 1, -0.5).unwrap(), 0.5, 1e-15));
        assert!(close(recip_elem(&v(&[4.0, 4.0]), 1, -0.5).unwrap(), 1.0, 1e-15));
        assert!(recip_elem(&v(&[1.0, 2.0, 3.0]), 2, -1.0).is_err());
        assert!(recip_elem(&v(&[1.0, 2.0, 3.0]), 2, 0.0).is_err());
    }

    #[test]
    fn parallel_sum_form_of_phi() {
        for (xs, k, p) in [
            (&[1.0, 2.0, 3.0][..], 2, 1.0),
            (&[0.3, 4.0, 1.1, 9.0][..], 3, 0.4),
            (&[0.05, 20.0, 3.0, 7.0, 0.6][..], 5, 0.9),
        ] {
            let x = v(xs);
            let direct = phi(&x, k, p).unwrap();
            let rebuilt = phi_via_parallel_sums(&x, k, p).unwrap();
            assert!(close(rebuilt, direct, 1e-12), "{rebuilt} vs {direct}");
        }
    }

    #[test]
    fn ratio_spec_ranges() {
        let x = v(&[1.0, 2.0, 3.0]);
        let spec = RatioSpec::new(RatioKind::ElemRatio, 2, 1, 0.5);
        assert!(close(spec.evaluate(&x).unwrap(), phi(&x, 2, 0.5).unwrap(), 0.0));
        let spec = RatioSpec::new(RatioKind::ElemRatio, 3, 2, 1.0);
        assert!(close(spec.evaluate(&x).unwrap(), big_phi(&x, 3, 2, 1.0).unwrap(), 0.0));
        assert!(RatioSpec::new(RatioKind::ElemRoot, 1, 1, 2.0).evaluate(&x).is_err());
        assert!(RatioSpec::new(RatioKind::HomRoot, 2, 1, 0.5).evaluate(&x).is_err());
        assert!(RatioSpec::new(RatioKind::HomRatio, 1, 1, 1.0).evaluate(&x).is_err());
        assert!(RatioSpec::new(RatioKind::RecipElem, 1, 1, -1.0).evaluate(&x).is_err());
        assert!(RatioSpec::new(RatioKind::ElemRoot, 4, 1, 0.5).evaluate(&x).is_err());
        assert!(RatioSpec::new(RatioKind::HomRoot, 5, 1, 1.0).evaluate(&x).is_ok());
    }
}
