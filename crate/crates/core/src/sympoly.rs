//! Elementary (`e_k`) and complete homogeneous (`h_k`) symmetric polynomials.
//!
//! Both are evaluated with the classic one-pass recurrences, which only ever
//! add nonnegative terms and therefore never cancel. The log-domain variants
//! run the recurrence directly when it stays in range, otherwise shift every
//! entry by the largest one and run it on the normalized entries (all in
//! `[0, 1]`), and fall back to a log-sum-exp recurrence when even those
//! values would underflow.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Normalized recurrence values below this are recomputed in the log domain.
const UNDERFLOW_GUARD: f64 = 1e-280;

/// Largest dimension accepted by [`brute_elem_sym`].
pub const BRUTE_ELEM_MAX_N: usize = 16;

/// Largest number of monomials enumerated by [`brute_complete_hom`].
pub const BRUTE_HOM_MAX_TERMS: f64 = 1e6;

/// A finite vector of nonnegative reals with at least one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("vector must have at least one entry");
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return domain(format!("entries must be finite and nonnegative, got {bad}"));
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Vector with every entry equal to `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when every entry is strictly positive.
    pub fn is_strict(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0)
    }

    pub fn require_strict(&self, context: &str) -> Result<()> {
        if self.is_strict() {
            Ok(())
        } else {
            domain(format!("{context} requires strictly positive entries"))
        }
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "vectors have lengths {} and {}",
                self.len(),
                other.len()
            )))
        }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Entrywise `(a + b) / 2`.
    pub fn midpoint(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| 0.5 * a + 0.5 * b)
                .collect(),
        )
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * t).collect())
    }

    /// The vector with coordinate `j` deleted, or `None` if that would leave it empty.
    pub fn without(&self, j: usize) -> Option<Self> {
        if self.len() < 2 || j >= self.len() {
            return None;
        }
        let mut v = self.0.clone();
        v.remove(j);
        Some(Self(v))
    }
}

impl TryFrom<Vec<f64>> for PositiveVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PositiveVector> for Vec<f64> {
    fn from(v: PositiveVector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for PositiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A nonnegative real stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    log_magnitude: f64,
    zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        zero: true,
    };

    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        zero: false,
    };

    /// Wraps a natural logarithm; `-inf` maps to zero.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude: ln,
                zero: false,
            }
        }
    }

    pub fn from_value(r: f64) -> Result<Self> {
        if !(r >= 0.0) || r.is_infinite() {
            return domain(format!("LogValue needs a finite nonnegative value, got {r}"));
        }
        Ok(Self::from_ln(r.ln()))
    }

    /// Natural log, `-inf` for zero.
    pub fn ln(self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn is_zero(self) -> bool {
        self.zero
    }

    /// The represented value; overflows to `inf` past `f64::MAX`.
    pub fn value(self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }

    pub fn times(self, other: Self) -> Self {
        if self.zero || other.zero {
            Self::ZERO
        } else {
            Self::from_ln(self.log_magnitude + other.log_magnitude)
        }
    }

    pub fn plus(self, other: Self) -> Self {
        Self::from_ln(log_add_exp(self.ln(), other.ln()))
    }

    pub fn powf(self, t: f64) -> Self {
        if self.zero {
            if t > 0.0 {
                Self::ZERO
            } else {
                Self::ONE
            }
        } else {
            Self::from_ln(self.log_magnitude * t)
        }
    }
}

/// `ln(e^a + e^b)` with max-shift; `-inf` is the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Elementary,
    CompleteHomogeneous,
}

/// The values `ln s_0(x), ..., ln s_K(x)` of one family of symmetric
/// polynomials, stored relative to a common shift so that ratios
/// `s_j / s_i` lose nothing to the magnitude of the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    shift: f64,
    logs: Vec<f64>,
    /// Unscaled values, kept when the direct recurrence stayed in range.
    linear: Option<Vec<f64>>,
}

impl LogSeries {
    /// Highest degree held.
    pub fn max_degree(&self) -> usize {
        self.logs.len() - 1
    }

    /// `ln s_j`.
    pub fn ln(&self, j: usize) -> f64 {
        let l = self.logs[j];
        if l == f64::NEG_INFINITY || j == 0 {
            l
        } else {
            l + j as f64 * self.shift
        }
    }

    pub fn get(&self, j: usize) -> LogValue {
        LogValue::from_ln(self.ln(j))
    }

    /// `ln(s_j / s_i)`.
    pub fn ln_ratio(&self, j: usize, i: usize) -> f64 {
        let (a, b) = (self.logs[j], self.logs[i]);
        if a == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if b == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (a - b) + (j as f64 - i as f64) * self.shift
    }

    /// `s_j / s_i`, as a quotient of unscaled values when those are available.
    pub fn ratio(&self, j: usize, i: usize) -> f64 {
        match &self.linear {
            Some(lin) if lin[i] > 0.0 => lin[j] / lin[i],
            _ => self.ln_ratio(j, i).exp(),
        }
    }
}

fn check_elem_degree(n: usize, k: usize) -> Result<()> {
    if k > n {
        domain(format!("degree k = {k} exceeds dimension n = {n}"))
    } else {
        Ok(())
    }
}

/// Plain recurrence; `None` when any value underflowed below
/// [`UNDERFLOW_GUARD`] or overflowed.
fn linear_recurrence(y: &[f64], kmax: usize, family: Family, positives: usize) -> Option<Vec<f64>> {
    let mut s = vec![0.0; kmax + 1];
    s[0] = 1.0;
    for &v in y {
        if v == 0.0 {
            continue;
        }
        match family {
            Family::Elementary => {
                for j in (1..=kmax).rev() {
                    s[j] += v * s[j - 1];
                }
            }
            Family::CompleteHomogeneous => {
                for j in 1..=kmax {
                    s[j] += v * s[j - 1];
                }
            }
        }
    }
    for (j, &value) in s.iter().enumerate() {
        let expect_positive = match family {
            Family::Elementary => positives >= j,
            Family::CompleteHomogeneous => positives > 0 || j == 0,
        };
        if !value.is_finite() || (expect_positive && value < UNDERFLOW_GUARD) {
            return None;
        }
    }
    Some(s)
}

fn ln_all(s: &[f64]) -> Vec<f64> {
    s.iter().map(|v| v.ln()).collect()
}

fn log_recurrence(ln_y: &[f64], kmax: usize, family: Family) -> Vec<f64> {
    let mut s = vec![f64::NEG_INFINITY; kmax + 1];
    s[0] = 0.0;
    for &lv in ln_y {
        if lv == f64::NEG_INFINITY {
            continue;
        }
        match family {
            Family::Elementary => {
                for j in (1..=kmax).rev() {
                    s[j] = log_add_exp(s[j], lv + s[j - 1]);
                }
            }
            Family::CompleteHomogeneous => {
                for j in 1..=kmax {
                    s[j] = log_add_exp(s[j], lv + s[j - 1]);
                }
            }
        }
    }
    s
}

fn trivial_series(kmax: usize) -> LogSeries {
    let mut logs = vec![f64::NEG_INFINITY; kmax + 1];
    logs[0] = 0.0;
    LogSeries { shift: 0.0, logs, linear: None }
}

fn series_from_linear(x: &[f64], kmax: usize, family: Family) -> LogSeries {
    let max = x.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return trivial_series(kmax);
    }
    let positives = x.iter().filter(|v| **v > 0.0).count();
    if let Some(lin) = linear_recurrence(x, kmax, family, positives) {
        return LogSeries {
            shift: 0.0,
            logs: ln_all(&lin),
            linear: Some(lin),
        };
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / max).collect();
    let logs = linear_recurrence(&scaled, kmax, family, positives)
        .map(|s| ln_all(&s))
        .unwrap_or_else(|| {
            let ln_max = max.ln();
            let ln_y: Vec<f64> = x.iter().map(|v| v.ln() - ln_max).collect();
            log_recurrence(&ln_y, kmax, family)
        });
    LogSeries {
        shift: max.ln(),
        logs,
        linear: None,
    }
}

fn series_from_logs(ln_x: &[f64], kmax: usize, family: Family) -> LogSeries {
    let max = ln_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return trivial_series(kmax);
    }
    let positives = ln_x.iter().filter(|v| **v > f64::NEG_INFINITY).count();
    let ln_y: Vec<f64> = ln_x.iter().map(|v| v - max).collect();
    let scaled: Vec<f64> = ln_y.iter().map(|v| v.exp()).collect();
    let logs = linear_recurrence(&scaled, kmax, family, positives)
        .map(|s| ln_all(&s))
        .unwrap_or_else(|| log_recurrence(&ln_y, kmax, family));
    LogSeries {
        shift: max,
        logs,
        linear: None,
    }
}

/// `ln e_0(x), ..., ln e_kmax(x)`.
pub fn elem_sym_series(x: &PositiveVector, kmax: usize) -> Result<LogSeries> {
    check_elem_degree(x.len(), kmax)?;
    Ok(series_from_linear(x.as_slice(), kmax, Family::Elementary))
}

/// `ln h_0(x), ..., ln h_kmax(x)`.
pub fn complete_hom_series(x: &PositiveVector, kmax: usize) -> LogSeries {
    series_from_linear(x.as_slice(), kmax, Family::CompleteHomogeneous)
}

/// `ln e_j(x^p)` for `j = 0..=kmax`, without materializing `x^p`.
pub fn elem_sym_series_pow(x: &PositiveVector, p: f64, kmax: usize) -> Result<LogSeries> {
    check_elem_degree(x.len(), kmax)?;
    if p == 1.0 {
        return Ok(series_from_linear(x.as_slice(), kmax, Family::Elementary));
    }
    Ok(series_from_logs(&powered_logs(x, p)?, kmax, Family::Elementary))
}

/// `ln h_j(x^p)` for `j = 0..=kmax`, without materializing `x^p`.
pub fn complete_hom_series_pow(x: &PositiveVector, p: f64, kmax: usize) -> Result<LogSeries> {
    if p == 1.0 {
        return Ok(series_from_linear(x.as_slice(), kmax, Family::CompleteHomogeneous));
    }
    Ok(series_from_logs(
        &powered_logs(x, p)?,
        kmax,
        Family::CompleteHomogeneous,
    ))
}

fn powered_logs(x: &PositiveVector, p: f64) -> Result<Vec<f64>> {
    if !p.is_finite() {
        return domain(format!("exponent must be finite, got {p}"));
    }
    if p <= 0.0 && !x.is_strict() {
        return domain(format!("x^p with p = {p} needs strictly positive entries"));
    }
    if p == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    Ok(x.as_slice().iter().map(|v| p * v.ln()).collect())
}

/// `e_k(x)` by the ascending-k recurrence `E_j <- E_j + x_m E_{j-1}`.
pub fn elem_sym(x: &PositiveVector, k: usize) -> Result<f64> {
    check_elem_degree(x.len(), k)?;
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in x.as_slice() {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    Ok(e[k])
}

/// `e_k(x)` in the log domain.
pub fn elem_sym_log(x: &PositiveVector, k: usize) -> Result<LogValue> {
    Ok(elem_sym_series(x, k)?.get(k))
}

/// `h_k(x)` by `h_k(x_1..x_m) = h_k(x_1..x_{m-1}) + x_m h_{k-1}(x_1..x_m)`.
pub fn complete_hom(x: &PositiveVector, k: usize) -> f64 {
    let mut h = vec![0.0; k + 1];
    h[0] = 1.0;
    for &v in x.as_slice() {
        for j in 1..=k {
            h[j] += v * h[j - 1];
        }
    }
    h[k]
}

/// `h_k(x)` in the log domain.
pub fn complete_hom_log(x: &PositiveVector, k: usize) -> LogValue {
    complete_hom_series(x, k).get(k)
}

/// Elementwise power `x^p`.
pub fn power_vec(x: &PositiveVector, p: f64) -> Result<PositiveVector> {
    if !p.is_finite() {
        return domain(format!("exponent must be finite, got {p}"));
    }
    if p <= 0.0 && !x.is_strict() {
        return domain(format!("x^p with p = {p} needs strictly positive entries"));
    }
    let out: Vec<f64> = x.as_slice().iter().map(|v| v.powf(p)).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "x^p overflows at p = {p}; use the log-domain series"
        )));
    }
    PositiveVector::new(out)
}

/// `e_k` by explicit enumeration of every `k`-subset. Independent oracle for `n <= 16`.
pub fn brute_elem_sym(x: &PositiveVector, k: usize) -> Result<f64> {
    let n = x.len();
    if n > BRUTE_ELEM_MAX_N {
        return Err(Error::Refused(format!(
            "subset enumeration limited to n <= {BRUTE_ELEM_MAX_N}, got n = {n}"
        )));
    }
    check_elem_degree(n, k)?;
    let xs = x.as_slice();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut prod = 1.0;
        for (i, v) in xs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod *= v;
            }
        }
        total += prod;
    }
    Ok(total)
}

/// Number of degree-`k` monomials in `n` variables, `C(n + k - 1, k)`, as a float.
pub fn multiset_count(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - 1 + i) as f64 / i as f64)
}

/// `h_k` by enumerating nondecreasing index tuples `i_1 <= ... <= i_k`.
pub fn brute_complete_hom(x: &PositiveVector, k: usize) -> Result<f64> {
    let count = multiset_count(x.len(), k);
    if count > BRUTE_HOM_MAX_TERMS {
        return Err(Error::Refused(format!(
            "multiset enumeration of {count:e} terms exceeds {BRUTE_HOM_MAX_TERMS:e}"
        )));
    }
    fn walk(xs: &[f64], start: usize, left: usize, prod: f64, total: &mut f64) {
        if left == 0 {
            *total += prod;
            return;
        }
        for i in start..xs.len() {
            walk(xs, i, left - 1, prod * xs[i], total);
        }
    }
    let mut total = 0.0;
    walk(x.as_slice(), 0, k, 1.0, &mut total);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> PositiveVector {
        PositiveVector::from_slice(xs).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn vector_rejects_bad_entries() {
        assert!(PositiveVector::new(vec![]).is_err());
        assert!(PositiveVector::new(vec![1.0, -0.5]).is_err());
        assert!(PositiveVector::new(vec![f64::NAN]).is_err());
        assert!(PositiveVector::new(vec![f64::INFINITY]).is_err());
        assert!(!v(&[1.0, 0.0]).is_strict());
        assert!(v(&[1.0, 2.0]).is_strict());
    }

    #[test]
    fn elem_sym_examples() {
        assert_eq!(elem_sym(&v(&[1.0, 1.0, 1.0]), 2).unwrap(), 3.0);
        assert_eq!(elem_sym(&v(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(elem_sym(&v(&[4.0, 7.0]), 0).unwrap(), 1.0);
        assert!(matches!(elem_sym(&v(&[1.0, 2.0]), 3), Err(Error::Domain(_))));
    }

    #[test]
    fn elem_sym_log_examples() {
        let l = elem_sym_log(&v(&[1.0, 1.0]), 1).unwrap();
        assert!((l.ln() - 2f64.ln()).abs() < 1e-15);
        let l = elem_sym_log(&v(&[1e200, 1e200]), 2).unwrap();
        let want = 400.0 * 10f64.ln();
        assert!(rel(l.ln(), want) < 1e-14, "{} vs {}", l.ln(), want);
        let l = elem_sym_log(&v(&[1.0, 2.0, 3.0]), 3).unwrap();
        assert!((l.ln() - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn elem_sym_log_survives_extreme_spread() {
        // e_3 = 1e200 * 1e-200 * 1e-200 underflows after normalizing by the max.
        let x = v(&[1e200, 1e-200, 1e-200]);
        let l = elem_sym_log(&x, 3).unwrap();
        assert!(rel(l.ln(), -200.0 * 10f64.ln()) < 1e-13);
        let l = elem_sym_log(&v(&[300f64.exp(); 64]), 64).unwrap();
        assert!(rel(l.ln(), 64.0 * 300.0) < 1e-13);
    }

    #[test]
    fn zero_entries() {
        let x = v(&[0.0, 2.0, 3.0]);
        assert_eq!(elem_sym(&x, 3).unwrap(), 0.0);
        assert!(elem_sym_log(&x, 3).unwrap().is_zero());
        assert!(rel(elem_sym_log(&x, 2).unwrap().value(), 6.0) < 1e-15);
        let z = v(&[0.0, 0.0]);
        assert_eq!(complete_hom(&z, 2), 0.0);
        assert!(complete_hom_log(&z, 2).is_zero());
        assert_eq!(complete_hom_log(&z, 0).value(), 1.0);
    }

    #[test]
    fn complete_hom_examples() {
        assert_eq!(complete_hom(&v(&[1.0, 1.0, 1.0]), 2), 6.0);
        assert_eq!(complete_hom(&v(&[1.0, 2.0]), 2), 7.0);
        assert_eq!(complete_hom(&v(&[9.0, 2.0]), 0), 1.0);
        assert!(rel(complete_hom_log(&v(&[1.0, 2.0, 3.0]), 3).value(), 90.0) < 1e-14);
    }

    #[test]
    fn power_vec_examples() {
        assert_eq!(power_vec(&v(&[1.0, 4.0, 9.0]), 0.5).unwrap().as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(power_vec(&v(&[2.0, 2.0]), -1.0).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(power_vec(&v(&[1.0, 2.0, 3.0]), 1.0).unwrap().as_slice(), &[1.0, 2.0, 3.0]);
        assert!(power_vec(&v(&[0.0, 2.0]), -1.0).is_err());
        assert!(matches!(power_vec(&v(&[1e200]), 2.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn brute_oracles() {
        assert_eq!(brute_elem_sym(&v(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(brute_elem_sym(&v(&[5.0]), 1).unwrap(), 5.0);
        assert_eq!(brute_elem_sym(&v(&[1.0, 2.0, 3.0, 4.0]), 4).unwrap(), 24.0);
        assert!(matches!(
            brute_elem_sym(&PositiveVector::constant(17, 1.0).unwrap(), 2),
            Err(Error::Refused(_))
        ));
        assert_eq!(brute_complete_hom(&v(&[1.0, 2.0]), 2).unwrap(), 7.0);
        assert_eq!(brute_complete_hom(&v(&[3.0]), 4).unwrap(), 81.0);
        assert_eq!(brute_complete_hom(&v(&[1.0, 1.0]), 3).unwrap(), 4.0);
        assert!(matches!(
            brute_complete_hom(&PositiveVector::constant(30, 1.0).unwrap(), 10),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn series_ratios_cancel_shift() {
        let x = v(&[1e150, 2e150, 3e150]);
        let s = elem_sym_series(&x, 3).unwrap();
        assert!(rel(s.ln_ratio(2, 1).exp(), 11.0 / 6.0 * 1e150) < 1e-13);
        assert_eq!(s.max_degree(), 3);
    }

    #[test]
    fn log_value_arithmetic() {
        let a = LogValue::from_value(3.0).unwrap();
        let b = LogValue::from_value(5.0).unwrap();
        assert!(rel(a.plus(b).value(), 8.0) < 1e-15);
        assert!(rel(a.times(b).value(), 15.0) < 1e-15);
        assert!(rel(a.powf(2.0).value(), 9.0) < 1e-15);
        assert_eq!(LogValue::ZERO.plus(a), a);
        assert!(LogValue::ZERO.times(a).is_zero());
        assert!(LogValue::from_value(-1.0).is_err());
        assert_eq!(LogValue::from_value(0.0).unwrap(), LogValue::ZERO);
    }
}
