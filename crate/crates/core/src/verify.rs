//! Randomized verification of the inequalities.
//!
//! A trial samples inputs from a generator keyed by `(seed, checker id, p,
//! trial index)`, evaluates one inequality for every selected degree and
//! records the oriented margin (nonnegative means the inequality held). Pass
//! counts and worst margins are folded in index order, so a summary does not
//! depend on how many threads produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::map_indexed;
use crate::funcs::{big_phi, elem_root, hom_ratio, hom_root, marcus_lopes_ratio, phi};
use crate::parsum::{multi_p_par_sum, par_sum, PExponent};
use crate::seed::{trial_rng, TrialRng};
use crate::sympoly::{elem_sym_series_pow, PositiveVector};

/// Default pass tolerance for vector inequalities.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A reported counterexample must miss by this multiple of the pass tolerance.
pub const COUNTEREXAMPLE_FACTOR: f64 = 10.0;

/// Highest degree sampled for the `h_k`, Dresher and mixed-Minkowski checkers.
pub const HOM_K_MAX: usize = 8;

pub const ELEM_P_GRID: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
pub const HOM_P_GRID: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
pub const RECIP_P_GRID: [f64; 3] = [-0.9, -0.5, -0.1];
pub const MULTI_P_GRID: [f64; 9] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 3.0];

/// `max(1, |lhs|, |rhs|)`, the scale against which margins are judged.
pub fn margin_scale(lhs: f64, rhs: f64) -> f64 {
    1f64.max(lhs.abs()).max(rhs.abs())
}

/// Which of the two Dresher-type forms a trial evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DresherForm {
    /// Denominator `(a+b)^p + (c+d)^p`, exponent `1/(p(k-1))`.
    Ratio,
    /// Dresher's inequality itself: denominator `a^p+b^p+c^p+d^p`, exponent `1/(k-1)`.
    Dresher,
}

/// The sampled inputs of one trial, kept at full precision for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrialInputs {
    Vectors {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    Scalars {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    Matrices {
        x: Vec<Vec<f64>>,
        y: Vec<Vec<f64>>,
    },
    Spectral {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<Vec<f64>>>,
        x: Vec<Vec<f64>>,
        y: Vec<Vec<f64>>,
    },
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub checker_id: String,
    pub inputs: TrialInputs,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<DresherForm>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub trial_index: u64,
}

impl InequalityReport {
    pub(crate) fn new(
        checker_id: &str,
        inputs: TrialInputs,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        let pass = margin >= -tolerance * margin_scale(lhs, rhs);
        Self {
            checker_id: checker_id.to_string(),
            inputs,
            n: 0,
            k: 0,
            l: 0,
            p: 1.0,
            form: None,
            lhs,
            rhs,
            margin,
            tolerance,
            pass,
            trial_index: 0,
        }
    }

    pub fn with_params(mut self, n: usize, k: usize, l: usize, p: f64) -> Self {
        self.n = n;
        self.k = k;
        self.l = l;
        self.p = p;
        self
    }

    pub fn with_form(mut self, form: DresherForm) -> Self {
        self.form = Some(form);
        self
    }

    pub fn with_trial(mut self, index: u64) -> Self {
        self.trial_index = index;
        self
    }

    /// `margin / max(1, |lhs|, |rhs|)`.
    pub fn scaled_margin(&self) -> f64 {
        self.margin / margin_scale(self.lhs, self.rhs)
    }

    /// Strict violation: misses by more than [`COUNTEREXAMPLE_FACTOR`] times the tolerance.
    pub fn is_counterexample(&self) -> bool {
        self.scaled_margin() < -COUNTEREXAMPLE_FACTOR * self.tolerance
    }
}

fn vector_inputs(x: &PositiveVector, y: &PositiveVector) -> TrialInputs {
    TrialInputs::Vectors {
        x: x.as_slice().to_vec(),
        y: y.as_slice().to_vec(),
    }
}

/// `f(x + y) >= f(x) + f(y)`; margin `lhs - rhs`.
pub fn check_superadditive<F>(
    checker_id: &str,
    f: F,
    x: &PositiveVector,
    y: &PositiveVector,
    tol: f64,
) -> Result<InequalityReport>
where
    F: Fn(&PositiveVector) -> Result<f64>,
{
    let lhs = f(&x.add(y)?)?;
    let rhs = f(x)? + f(y)?;
    Ok(InequalityReport::new(checker_id, vector_inputs(x, y), lhs, rhs, lhs - rhs, tol)
        .with_params(x.len(), 0, 0, 1.0))
}

/// `f(x + y) <= f(x) + f(y)`; margin `rhs - lhs`.
pub fn check_subadditive<F>(
    checker_id: &str,
    f: F,
    x: &PositiveVector,
    y: &PositiveVector,
    tol: f64,
) -> Result<InequalityReport>
where
    F: Fn(&PositiveVector) -> Result<f64>,
{
    let lhs = f(&x.add(y)?)?;
    let rhs = f(x)? + f(y)?;
    Ok(InequalityReport::new(checker_id, vector_inputs(x, y), lhs, rhs, rhs - lhs, tol)
        .with_params(x.len(), 0, 0, 1.0))
}

/// Harmonic-mean bound `e_k(((x+y)/2)^p) <= 2 (e_k(x^p) : e_k(y^p))`, which is
/// equivalent to concavity of `1 / e_k(x^p)` along the segment.
pub fn check_recip_concave(
    x: &PositiveVector,
    y: &PositiveVector,
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    if !(p > -1.0 && p < 0.0) {
        return domain(format!("reciprocal concavity check needs p in (-1, 0), got {p}"));
    }
    recip_concave_report(x, y, k, p, tol)
}

fn recip_concave_report(
    x: &PositiveVector,
    y: &PositiveVector,
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    x.require_strict("reciprocal concavity check")?;
    y.require_strict("reciprocal concavity check")?;
    if k == 0 || k > x.len() {
        return domain(format!("need 1 <= k <= n = {}, got k = {k}", x.len()));
    }
    let ek = |v: &PositiveVector| -> Result<f64> { Ok(elem_sym_series_pow(v, p, k)?.get(k).value()) };
    let lhs = ek(&x.midpoint(y)?)?;
    let rhs = 2.0 * par_sum(ek(x)?, ek(y)?)?;
    Ok(InequalityReport::new("recip-ek", vector_inputs(x, y), lhs, rhs, rhs - lhs, tol)
        .with_params(x.len(), k, 1, p))
}

/// The Dresher-type scalar inequality in either form; margin `rhs - lhs`.
///
/// A pair that is entirely zero contributes a zero right-hand term, its limit.
#[allow(clippy::too_many_arguments)]
pub fn check_dresher_scalar(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    k: usize,
    p: f64,
    form: DresherForm,
    tol: f64,
) -> Result<InequalityReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("Dresher check needs p >= 1, got {p}"));
    }
    dresher_report(a, b, c, d, k, p, form, tol)
}

#[allow(clippy::too_many_arguments)]
fn dresher_report(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    k: usize,
    p: f64,
    form: DresherForm,
    tol: f64,
) -> Result<InequalityReport> {
    if k < 2 {
        return domain(format!("Dresher check needs k >= 2, got {k}"));
    }
    if !(p > 0.0) || !p.is_finite() {
        return domain(format!("Dresher check needs p > 0, got {p}"));
    }
    if [a, b, c, d].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return domain("Dresher check needs finite nonnegative a, b, c, d");
    }
    let m = a.max(b).max(c).max(d);
    if m == 0.0 {
        return domain("Dresher check needs at least one positive entry");
    }
    let kf = k as f64;
    let (ua, ub, uc, ud) = ((a / m).powf(p), (b / m).powf(p), (c / m).powf(p), (d / m).powf(p));
    let pair_term = |u: f64, v: f64| {
        if u + v == 0.0 {
            0.0
        } else {
            (u.powf(kf) + v.powf(kf)) / (u + v)
        }
    };
    let (left, right) = (pair_term(ua, uc), pair_term(ub, ud));
    let numer = (ua + ub).powf(kf) + (uc + ud).powf(kf);
    let (lhs, rhs) = match form {
        DresherForm::Ratio => {
            let denom = ((a + b) / m).powf(p) + ((c + d) / m).powf(p);
            let e = 1.0 / (p * (kf - 1.0));
            let lhs = (numer / denom).powf(e) * m;
            (lhs, (left.powf(e) + right.powf(e)) * m)
        }
        DresherForm::Dresher => {
            let e = 1.0 / (kf - 1.0);
            let mp = m.powf(p);
            let lhs = (numer / (ua + ub + uc + ud)).powf(e) * mp;
            (lhs, (left.powf(e) + right.powf(e)) * mp)
        }
    };
    let inputs = TrialInputs::Scalars { a, b, c, d };
    Ok(InequalityReport::new("dresher", inputs, lhs, rhs, rhs - lhs, tol)
        .with_params(1, k, 1, p)
        .with_form(form))
}

/// `[sum_i (sum_j x_ij^p + y_ij^p)^k]^{1/pk} <= (sum x_ij^{pk})^{1/pk} + (sum y_ij^{pk})^{1/pk}`.
///
/// Holds for single-column inputs (vectors) with `p, k >= 1`. With two or
/// more columns it can fail; see [`search_counterexample`].
pub fn check_mixed_minkowski(
    xmat: &[Vec<f64>],
    ymat: &[Vec<f64>],
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    if !(p >= 1.0) || !p.is_finite() || k == 0 {
        return domain(format!("mixed Minkowski check needs p >= 1 and k >= 1, got p = {p}, k = {k}"));
    }
    mixed_minkowski_report(xmat, ymat, k, p, tol)
}

fn mixed_minkowski_report(
    xmat: &[Vec<f64>],
    ymat: &[Vec<f64>],
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    if k == 0 || !(p > 0.0) || !p.is_finite() {
        return domain(format!("mixed Minkowski check needs p > 0 and k >= 1, got p = {p}, k = {k}"));
    }
    let rows = xmat.len();
    let cols = xmat.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Shape("matrices must be nonempty".into()));
    }
    let shaped = |m: &[Vec<f64>]| m.len() == rows && m.iter().all(|r| r.len() == cols);
    if !shaped(xmat) || !shaped(ymat) {
        return Err(Error::Shape(format!("both matrices must be {rows}x{cols}")));
    }
    let entries = || xmat.iter().chain(ymat).flatten();
    if entries().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return domain("mixed Minkowski check needs finite nonnegative entries");
    }
    let m = entries().copied().fold(0.0, f64::max);
    if m == 0.0 {
        let inputs = TrialInputs::Matrices { x: xmat.to_vec(), y: ymat.to_vec() };
        return Ok(InequalityReport::new("mixed-minkowski", inputs, 0.0, 0.0, 0.0, tol)
            .with_params(rows, k, 1, p));
    }
    let kf = k as f64;
    let pk = p * kf;
    let lhs_sum: f64 = xmat
        .iter()
        .zip(ymat)
        .map(|(xr, yr)| {
            let inner: f64 = xr
                .iter()
                .zip(yr)
                .map(|(xv, yv)| (xv / m).powf(p) + (yv / m).powf(p))
                .sum();
            inner.powf(kf)
        })
        .sum();
    let norm = |mat: &[Vec<f64>]| -> f64 {
        mat.iter().flatten().map(|v| (v / m).powf(pk)).sum::<f64>().powf(1.0 / pk)
    };
    let lhs = lhs_sum.powf(1.0 / pk) * m;
    let rhs = (norm(xmat) + norm(ymat)) * m;
    let inputs = TrialInputs::Matrices { x: xmat.to_vec(), y: ymat.to_vec() };
    Ok(InequalityReport::new("mixed-minkowski", inputs, lhs, rhs, rhs - lhs, tol)
        .with_params(rows, k, 1, p))
}

/// The eleven inequality checkers of the vector suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Checker {
    /// `e_k / e_{k-1}` superadditive (the classical `p = 1` ratio).
    MlOrig,
    /// `phi_{k,n}` superadditive for `p` in `(0, 1]`.
    MlNew,
    /// `e_k(x^p)^{1/pk}` superadditive for `p` in `(0, 1]`.
    EkRoot,
    /// `Phi_{k,l,n}` superadditive for `p` in `(0, 1]`.
    BigPhi,
    /// Multivariate p-parallel sum superadditive for `p > 0`.
    MultiPpsum,
    /// `h_k^{1/k}` subadditive.
    HkMcleod,
    /// `h_k(x^p)^{1/pk}` subadditive for `p >= 1`.
    HkRoot,
    /// `(h_k / h_1)(x^p)^{1/(p(k-1))}` subadditive for `p >= 1`.
    HkRatio,
    /// `1 / e_k(x^p)` midpoint concave for `p` in `(-1, 0)`.
    RecipEk,
    /// Scalar Dresher-type inequality in both forms, `p >= 1`.
    Dresher,
    /// Mixed Minkowski inequality on single-column inputs, `p >= 1`.
    MixedMinkowski,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Elem,
    Hom,
    Recip,
    Parallel,
}

impl Checker {
    pub const ALL: [Checker; 11] = [
        Checker::MlOrig,
        Checker::MlNew,
        Checker::EkRoot,
        Checker::BigPhi,
        Checker::MultiPpsum,
        Checker::HkMcleod,
        Checker::HkRoot,
        Checker::HkRatio,
        Checker::RecipEk,
        Checker::Dresher,
        Checker::MixedMinkowski,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Checker::MlOrig => "ml-orig",
            Checker::MlNew => "ml-new",
            Checker::EkRoot => "ek-root",
            Checker::BigPhi => "big-phi",
            Checker::MultiPpsum => "multi-ppsum",
            Checker::HkMcleod => "hk-mcleod",
            Checker::HkRoot => "hk-root",
            Checker::HkRatio => "hk-ratio",
            Checker::RecipEk => "recip-ek",
            Checker::Dresher => "dresher",
            Checker::MixedMinkowski => "mixed-minkowski",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Checker::MlOrig | Checker::MlNew | Checker::EkRoot | Checker::BigPhi => Family::Elem,
            Checker::MultiPpsum => Family::Parallel,
            Checker::HkMcleod
            | Checker::HkRoot
            | Checker::HkRatio
            | Checker::Dresher
            | Checker::MixedMinkowski => Family::Hom,
            Checker::RecipEk => Family::Recip,
        }
    }

    /// Checkers defined at a single exponent.
    pub fn fixed_p(self) -> Option<f64> {
        match self {
            Checker::MlOrig | Checker::HkMcleod => Some(1.0),
            _ => None,
        }
    }

    pub fn default_p_grid(self) -> Vec<f64> {
        if let Some(p) = self.fixed_p() {
            return vec![p];
        }
        match self.family() {
            Family::Elem => ELEM_P_GRID.to_vec(),
            Family::Hom => HOM_P_GRID.to_vec(),
            Family::Recip => RECIP_P_GRID.to_vec(),
            Family::Parallel => MULTI_P_GRID.to_vec(),
        }
    }

    /// Whether `p` lies in the parameter range where the inequality is claimed.
    pub fn in_proven_range(self, p: f64) -> bool {
        if !p.is_finite() {
            return false;
        }
        if let Some(fixed) = self.fixed_p() {
            return p == fixed;
        }
        match self.family() {
            Family::Elem => p > 0.0 && p <= 1.0,
            Family::Hom => p >= 1.0,
            Family::Recip => p > -1.0 && p < 0.0,
            Family::Parallel => p > 0.0,
        }
    }

    /// Whether the checker takes no degree parameter.
    pub fn degree_free(self) -> bool {
        matches!(self, Checker::MultiPpsum)
    }

    /// Smallest and largest admissible `k` for sampled dimension `n`.
    pub fn k_bounds(self, n: usize) -> (usize, usize) {
        match self {
            Checker::MlOrig | Checker::MlNew | Checker::EkRoot | Checker::BigPhi | Checker::RecipEk => {
                (1, n)
            }
            Checker::MultiPpsum => (0, 0),
            Checker::HkMcleod | Checker::HkRoot | Checker::MixedMinkowski => (1, HOM_K_MAX),
            Checker::HkRatio | Checker::Dresher => (2, HOM_K_MAX),
        }
    }

    fn uses_l(self) -> bool {
        matches!(self, Checker::BigPhi)
    }

    /// Evaluates the inequality for explicit inputs. Works outside the proven
    /// range wherever the functional itself is defined.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        self,
        inputs: &TrialInputs,
        k: usize,
        l: usize,
        p: f64,
        form: Option<DresherForm>,
        tol: f64,
    ) -> Result<InequalityReport> {
        let id = self.id();
        let report = match (self, inputs) {
            (Checker::Dresher, TrialInputs::Scalars { a, b, c, d }) => {
                let form = form.unwrap_or(DresherForm::Ratio);
                return dresher_report(*a, *b, *c, *d, k, p, form, tol);
            }
            (Checker::MixedMinkowski, TrialInputs::Matrices { x, y }) => {
                return mixed_minkowski_report(x, y, k, p, tol);
            }
            (_, TrialInputs::Vectors { x, y }) => {
                let x = PositiveVector::from_slice(x)?;
                let y = PositiveVector::from_slice(y)?;
                match self {
                    Checker::MlOrig => {
                        check_superadditive(id, |v| marcus_lopes_ratio(v, k), &x, &y, tol)?
                    }
                    Checker::MlNew => check_superadditive(id, |v| phi(v, k, p), &x, &y, tol)?,
                    Checker::EkRoot => check_superadditive(id, |v| elem_root(v, k, p), &x, &y, tol)?,
                    Checker::BigPhi => check_superadditive(id, |v| big_phi(v, k, l, p), &x, &y, tol)?,
                    Checker::MultiPpsum => {
                        let e = PExponent::multivariate(p)?;
                        check_superadditive(id, |v| multi_p_par_sum(v, e), &x, &y, tol)?
                    }
                    Checker::HkMcleod => check_subadditive(id, |v| hom_root(v, k, 1.0), &x, &y, tol)?,
                    Checker::HkRoot => check_subadditive(id, |v| hom_root(v, k, p), &x, &y, tol)?,
                    Checker::HkRatio => check_subadditive(id, |v| hom_ratio(v, k, p), &x, &y, tol)?,
                    Checker::RecipEk => return recip_concave_report(&x, &y, k, p, tol),
                    Checker::Dresher | Checker::MixedMinkowski => {
                        return Err(Error::Shape(format!("{id} does not take vector inputs")))
                    }
                }
            }
            _ => return Err(Error::Shape(format!("inputs do not match checker {id}"))),
        };
        let n = report.n;
        Ok(report.with_params(n, k, l, p))
    }

    fn forms(self) -> &'static [Option<DresherForm>] {
        match self {
            Checker::Dresher => &[Some(DresherForm::Ratio), Some(DresherForm::Dresher)],
            _ => &[None],
        }
    }

    fn sample_inputs(self, rng: &mut TrialRng, n: usize, cols: usize, dist: EntryDistribution) -> TrialInputs {
        match self {
            Checker::Dresher => TrialInputs::Scalars {
                a: dist.sample(rng),
                b: dist.sample(rng),
                c: dist.sample(rng),
                d: dist.sample(rng),
            },
            Checker::MixedMinkowski => {
                let mut mat = || -> Vec<Vec<f64>> {
                    (0..n).map(|_| (0..cols).map(|_| dist.sample(rng)).collect()).collect()
                };
                let x = mat();
                let y = mat();
                TrialInputs::Matrices { x, y }
            }
            _ => {
                let x = (0..n).map(|_| dist.sample(rng)).collect();
                let y = (0..n).map(|_| dist.sample(rng)).collect();
                TrialInputs::Vectors { x, y }
            }
        }
    }
}

impl fmt::Display for Checker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Checker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Checker::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown checker id {s:?}")))
    }
}

/// How degrees `k` (or `l`) are chosen in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DegreePolicy {
    /// Every admissible value is evaluated in each trial.
    AllValid,
    Fixed(usize),
    /// One admissible value drawn uniformly per trial.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryDistribution {
    LogUniform { lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl EntryDistribution {
    pub fn validate(self) -> Result<()> {
        match self {
            EntryDistribution::LogUniform { lo, hi } if lo > 0.0 && lo <= hi && hi.is_finite() => Ok(()),
            EntryDistribution::Uniform { lo, hi } if lo >= 0.0 && lo <= hi && hi.is_finite() => Ok(()),
            other => Err(Error::Config(format!("invalid entry distribution {other:?}"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            EntryDistribution::LogUniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo.ln()..hi.ln()).exp()
                }
            }
            EntryDistribution::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..hi)
                }
            }
        }
    }
}

/// Parameters of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: u64,
    pub n_range: (usize, usize),
    pub k_policy: DegreePolicy,
    pub l_policy: DegreePolicy,
    /// `None` selects each checker's default grid.
    pub p_grid: Option<Vec<f64>>,
    pub entry_distribution: EntryDistribution,
    pub tolerance: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 10_000,
            n_range: (2, 8),
            k_policy: DegreePolicy::AllValid,
            l_policy: DegreePolicy::AllValid,
            p_grid: None,
            entry_distribution: EntryDistribution::LogUniform { lo: 1e-2, hi: 1e2 },
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let (lo, hi) = self.n_range;
        if lo < 1 || hi > 64 || lo > hi {
            return Err(Error::Config(format!("n range {lo}..{hi} must lie within 1..64")));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Config(format!("tolerance must be finite and >= 0, got {}", self.tolerance)));
        }
        if let Some(grid) = &self.p_grid {
            if grid.is_empty() {
                return Err(Error::Config("p grid must not be empty".into()));
            }
        }
        self.entry_distribution.validate()
    }

    /// The grid a checker runs over, checked against its proven range.
    pub fn p_grid_for(&self, checker: Checker) -> Result<Vec<f64>> {
        let grid = match (&self.p_grid, checker.fixed_p()) {
            (_, Some(p)) => vec![p],
            (Some(g), None) => g.clone(),
            (None, None) => checker.default_p_grid(),
        };
        if let Some(bad) = grid.iter().find(|p| !checker.in_proven_range(**p)) {
            return Err(Error::Config(format!(
                "p = {bad} is outside the proven range of {checker}; use the counterexample search"
            )));
        }
        Ok(grid)
    }
}

/// Per-checker aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerSummary {
    pub trials: u64,
    pub passes: u64,
    pub evaluations: u64,
    /// Raw margin of the worst evaluation (judged by scaled margin).
    pub worst_margin: f64,
    pub worst_scaled_margin: f64,
    pub worst_trial_index: u64,
    pub worst_p: f64,
}

impl CheckerSummary {
    pub fn violations(&self) -> u64 {
        self.trials - self.passes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub checkers: BTreeMap<String, CheckerSummary>,
    pub violations: Vec<InequalityReport>,
}

impl SuiteSummary {
    pub fn total_violations(&self) -> u64 {
        self.checkers.values().map(CheckerSummary::violations).sum()
    }
}

/// Result of one trial: its worst evaluation and every failing one.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub worst: InequalityReport,
    pub failures: Vec<InequalityReport>,
    pub evaluations: u64,
}

impl TrialOutcome {
    pub fn from_reports(reports: Vec<InequalityReport>) -> Option<Self> {
        let evaluations = reports.len() as u64;
        let worst = reports
            .iter()
            .min_by(|a, b| a.scaled_margin().total_cmp(&b.scaled_margin()))?
            .clone();
        let failures = reports.into_iter().filter(|r| !r.pass).collect();
        Some(Self { worst, failures, evaluations })
    }
}

/// Folds trial outcomes (in index order) into a summary entry.
pub fn aggregate(outcomes: &[TrialOutcome]) -> Option<CheckerSummary> {
    let mut summary: Option<CheckerSummary> = None;
    for o in outcomes {
        let pass = o.failures.is_empty();
        let scaled = o.worst.scaled_margin();
        match summary.as_mut() {
            None => {
                summary = Some(CheckerSummary {
                    trials: 1,
                    passes: u64::from(pass),
                    evaluations: o.evaluations,
                    worst_margin: o.worst.margin,
                    worst_scaled_margin: scaled,
                    worst_trial_index: o.worst.trial_index,
                    worst_p: o.worst.p,
                })
            }
            Some(s) => {
                s.trials += 1;
                s.passes += u64::from(pass);
                s.evaluations += o.evaluations;
                if scaled < s.worst_scaled_margin {
                    s.worst_margin = o.worst.margin;
                    s.worst_scaled_margin = scaled;
                    s.worst_trial_index = o.worst.trial_index;
                    s.worst_p = o.worst.p;
                }
            }
        }
    }
    summary
}

pub(crate) fn pick_degrees<R: Rng + ?Sized>(
    policy: DegreePolicy,
    lo: usize,
    hi: usize,
    rng: &mut R,
) -> Vec<usize> {
    if lo > hi {
        return Vec::new();
    }
    match policy {
        DegreePolicy::AllValid => (lo..=hi).collect(),
        DegreePolicy::Fixed(k) if (lo..=hi).contains(&k) => vec![k],
        DegreePolicy::Fixed(_) => Vec::new(),
        DegreePolicy::Random => vec![rng.random_range(lo..=hi)],
    }
}

/// Runs one trial of `checker` at exponent `p`.
pub fn run_trial(config: &TrialConfig, checker: Checker, p: f64, trial_index: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, checker.id(), &[p.to_bits(), trial_index]);
    let (nlo, nhi) = config.n_range;
    let n = rng.random_range(nlo..=nhi);
    let inputs = checker.sample_inputs(&mut rng, n, 1, config.entry_distribution);
    let mut reports = Vec::new();
    if checker.degree_free() {
        reports.push(checker.evaluate(&inputs, 0, 0, p, None, config.tolerance)?);
    } else {
        let (klo, khi) = checker.k_bounds(n);
        for k in pick_degrees(config.k_policy, klo, khi, &mut rng) {
            let ls = if checker.uses_l() {
                pick_degrees(config.l_policy, 1, k, &mut rng)
            } else {
                vec![1]
            };
            for l in ls {
                for form in checker.forms() {
                    reports.push(checker.evaluate(&inputs, k, l, p, *form, config.tolerance)?);
                }
            }
        }
    }
    let reports: Vec<_> = reports.into_iter().map(|r| r.with_trial(trial_index)).collect();
    TrialOutcome::from_reports(reports).ok_or_else(|| {
        Error::Config(format!(
            "degree policy leaves nothing to evaluate for {checker} at n = {n}"
        ))
    })
}

/// Runs `config.trials` trials per checker per grid point.
pub fn run_suite(config: &TrialConfig, checkers: &[Checker]) -> Result<SuiteSummary> {
    config.validate()?;
    let grids = checkers
        .iter()
        .map(|c| config.p_grid_for(*c))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = SuiteSummary {
        checkers: BTreeMap::new(),
        violations: Vec::new(),
    };
    for (checker, grid) in checkers.iter().zip(grids) {
        let per_p = grid.len();
        let total = per_p * config.trials as usize;
        let outcomes = map_indexed(total, |i| {
            let p = grid[i / config.trials as usize];
            run_trial(config, *checker, p, (i % config.trials as usize) as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        if let Some(s) = aggregate(&outcomes) {
            summary.checkers.insert(checker.id().to_string(), s);
        }
        summary
            .violations
            .extend(outcomes.into_iter().flat_map(|o| o.failures));
    }
    Ok(summary)
}

/// A parameter region for the counterexample search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub checker: String,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p: f64,
    /// Column count for the mixed Minkowski inequality.
    pub cols: usize,
    pub entry_distribution: EntryDistribution,
    pub tolerance: f64,
}

impl SearchRegion {
    pub fn new(checker: Checker, n: usize, k: usize, p: f64) -> Self {
        Self {
            checker: checker.id().to_string(),
            n,
            k,
            l: 1,
            p,
            cols: 1,
            entry_distribution: EntryDistribution::LogUniform { lo: 1e-2, hi: 1e2 },
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Rejects regions that overlap a proven range or that cannot be evaluated.
    pub fn validate(&self) -> Result<Checker> {
        let checker: Checker = self.checker.parse()?;
        self.entry_distribution.validate()?;
        if !self.p.is_finite() {
            return domain(format!("p must be finite, got {}", self.p));
        }
        let outside = match checker {
            Checker::MixedMinkowski => {
                if self.cols == 0 {
                    return domain("cols must be at least 1");
                }
                !checker.in_proven_range(self.p) || self.cols >= 2
            }
            _ => !checker.in_proven_range(self.p),
        };
        if !outside {
            return domain(format!(
                "region p = {} (cols = {}) lies inside the proven range of {checker}",
                self.p, self.cols
            ));
        }
        match checker {
            Checker::MlNew | Checker::EkRoot | Checker::BigPhi | Checker::Dresher | Checker::MixedMinkowski
                if self.p <= 0.0 =>
            {
                domain(format!("{checker} is undefined at p = {}", self.p))
            }
            Checker::MlNew | Checker::EkRoot | Checker::BigPhi | Checker::RecipEk
            | Checker::Dresher | Checker::MixedMinkowski => {
                let n = if checker == Checker::Dresher { usize::MAX } else { self.n };
                let (klo, khi) = checker.k_bounds(n);
                if self.n == 0 || self.k < klo || self.k > khi.max(klo) {
                    return domain(format!("k = {} is not admissible for {checker} at n = {}", self.k, self.n));
                }
                if checker == Checker::BigPhi && (self.l == 0 || self.l > self.k) {
                    return domain(format!("need 1 <= l <= k, got l = {}", self.l));
                }
                Ok(checker)
            }
            _ => domain(format!("{checker} has no evaluable region outside its proven range")),
        }
    }
}

fn normalize_inputs(inputs: &mut TrialInputs) {
    let scale_all = |vals: &mut dyn Iterator<Item = &mut f64>| {
        let items: Vec<&mut f64> = vals.collect();
        let m = items.iter().map(|v| **v).fold(0.0, f64::max);
        if m > 0.0 {
            for v in items {
                *v /= m;
            }
        }
    };
    match inputs {
        TrialInputs::Vectors { x, y } => scale_all(&mut x.iter_mut().chain(y.iter_mut())),
        TrialInputs::Scalars { a, b, c, d } => scale_all(&mut [a, b, c, d].into_iter()),
        TrialInputs::Matrices { x, y } => {
            scale_all(&mut x.iter_mut().flatten().chain(y.iter_mut().flatten()))
        }
        TrialInputs::Spectral { .. } => {}
    }
}

fn perturb_inputs(inputs: &TrialInputs, rng: &mut TrialRng, sigma: f64) -> TrialInputs {
    let mut out = inputs.clone();
    let mut jitter = |v: &mut f64| {
        let z: f64 = StandardNormal.sample(rng);
        *v *= (sigma * z).exp();
    };
    match &mut out {
        TrialInputs::Vectors { x, y } => x.iter_mut().chain(y.iter_mut()).for_each(&mut jitter),
        TrialInputs::Scalars { a, b, c, d } => [a, b, c, d].into_iter().for_each(&mut jitter),
        TrialInputs::Matrices { x, y } => x
            .iter_mut()
            .flatten()
            .chain(y.iter_mut().flatten())
            .for_each(&mut jitter),
        TrialInputs::Spectral { .. } => {}
    }
    normalize_inputs(&mut out);
    out
}

fn worst_of(checker: Checker, inputs: &TrialInputs, region: &SearchRegion) -> Result<InequalityReport> {
    let mut worst: Option<InequalityReport> = None;
    for form in checker.forms() {
        let r = checker.evaluate(inputs, region.k, region.l, region.p, *form, region.tolerance)?;
        if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
            worst = Some(r);
        }
    }
    Ok(worst.expect("at least one form"))
}

/// Random search, alternating fresh samples with multiplicative refinement
/// of the most negative candidate, over inputs normalized to unit maximum.
/// Spends the whole budget and returns the most severe strict violation.
pub fn search_counterexample(region: &SearchRegion, budget: u64, seed: u64) -> Result<Option<InequalityReport>> {
    let checker = region.validate()?;
    let mut rng = trial_rng(seed, &format!("search/{}", checker.id()), &[region.p.to_bits()]);
    let mut best: Option<InequalityReport> = None;
    for i in 0..budget {
        let refine = i % 2 == 1 && best.is_some();
        let candidate = match (&best, refine) {
            (Some(b), true) => {
                let sigma = (0.5 * 0.995f64.powf(i as f64)).max(0.01);
                perturb_inputs(&b.inputs, &mut rng, sigma)
            }
            _ => {
                let mut c = checker.sample_inputs(&mut rng, region.n, region.cols, region.entry_distribution);
                normalize_inputs(&mut c);
                c
            }
        };
        let report = match worst_of(checker, &candidate, region) {
            Ok(r) if r.margin.is_finite() => r.with_trial(i),
            _ => continue,
        };
        if best.as_ref().is_none_or(|b| report.margin < b.margin) {
            best = Some(report);
        }
    }
    Ok(best.filter(InequalityReport::is_counterexample))
}

/// Re-evaluates a recorded report from its stored inputs and parameters.
pub fn replay(report: &InequalityReport) -> Result<InequalityReport> {
    let fresh = match report.checker_id.as_str() {
        "muir" | "mariet" | "ekmtx" => crate::spectral::replay(report)?,
        id => {
            let checker: Checker = id.parse()?;
            checker.evaluate(
                &report.inputs,
                report.k,
                report.l,
                report.p,
                report.form,
                report.tolerance,
            )?
        }
    };
    Ok(fresh.with_trial(report.trial_index))
}
