//! Real symmetric matrices: a cyclic Jacobi eigensolver, spectral powers,
//! congruences, and the matrix log-convexity and reciprocal-concavity checks.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::map_indexed;
use crate::seed::{trial_rng, TrialRng};
use crate::sympoly::{elem_sym_series, elem_sym_series_pow, LogValue, PositiveVector};
use crate::verify::{
    aggregate, pick_degrees, DegreePolicy, InequalityReport, SuiteSummary, TrialInputs, TrialOutcome,
};

/// Largest dimension handled by the eigensolver.
pub const MAX_DIM: usize = 64;
pub const MAX_SWEEPS: usize = 100;
/// Default pass tolerance for matrix inequalities.
pub const MATRIX_TOLERANCE: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;
const OFFDIAG_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// Dense real symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Accepts a matrix whose asymmetry is within `1e-12 ||A||_max` and stores
    /// its symmetric part.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Shape(format!("dimension must lie in 1..={MAX_DIM}, got {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!("expected {} entries, got {}", dim * dim, entries.len())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return domain("matrix entries must be finite");
        }
        let max = entries.iter().fold(0f64, |m, v| m.max(v.abs()));
        let mut asym = 0f64;
        for i in 0..dim {
            for j in 0..i {
                asym = asym.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        if asym > SYMMETRY_TOL * max {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let mut m = Self { dim, entries };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("matrix rows must form a square".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            entries[i * dim + i] = *v;
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diag(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * self.entries[i * n + j] + 0.5 * self.entries[j * n + i];
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg;
            }
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `(self + other) / 2`.
    pub fn midpoint(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| 0.5 * a + 0.5 * b)
            .collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn matmul(&self, other: &Self) -> Result<Vec<f64>> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        Ok(matmul(&self.entries, &other.entries, self.dim, self.dim, self.dim))
    }
}

/// `(r x m) * (m x c)`, row-major.
fn matmul(a: &[f64], b: &[f64], r: usize, m: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for t in 0..m {
            let ait = a[i * m + t];
            if ait == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i * c + j] += ait * b[t * c + j];
            }
        }
    }
    out
}

/// Eigenvalues in ascending order with matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Row-major `dim x dim`; column `j` belongs to `values[j]`.
    pub vectors: Vec<f64>,
}

impl Eigen {
    /// `Q diag(f(lambda)) Q^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|v| f(*v)).collect();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..n)
                    .map(|t| self.vectors[i * n + t] * fl[t] * self.vectors[j * n + t])
                    .sum();
                entries[i * n + j] = s;
                entries[j * n + i] = s;
            }
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("spectral function produced non-finite entries".into()));
        }
        SymMatrix::new(n, entries)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn jacobi_eigen(x: &SymMatrix) -> Result<Eigen> {
    let n = x.dim;
    let mut a = x.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = OFFDIAG_TOL * x.frobenius();
    let off_mass = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        if off_mass(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r * n + p], a[r * n + q]);
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p * n + r], a[q * n + r]);
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let (vrp, vrq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    Ok(Eigen { values, vectors })
}

pub fn jacobi_eigenvalues(x: &SymMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_eigen(x)?.values)
}

fn positive_definite(x: &SymMatrix) -> Result<Eigen> {
    let e = jacobi_eigen(x)?;
    let min = e.min_value();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(e)
}

/// `X^p = Q diag(lambda^p) Q^T` for positive definite `X`.
pub fn matrix_power(x: &SymMatrix, p: f64) -> Result<SymMatrix> {
    if !p.is_finite() {
        return domain(format!("matrix power needs finite p, got {p}"));
    }
    positive_definite(x)?.reconstruct_with(|l| l.powf(p))
}

/// `e_k(lambda(X)^p)` in the log domain.
pub fn ek_spectral_log(x: &SymMatrix, k: usize, p: f64) -> Result<LogValue> {
    if k == 0 || k > x.dim {
        return domain(format!("need 1 <= k <= dim = {}, got k = {k}", x.dim));
    }
    if !p.is_finite() {
        return domain(format!("need finite p, got {p}"));
    }
    let lambda = PositiveVector::new(positive_definite(x)?.values)?;
    let series = if p == 1.0 {
        elem_sym_series(&lambda, k)?
    } else {
        elem_sym_series_pow(&lambda, p, k)?
    };
    Ok(series.get(k))
}

/// `e_k` of the eigenvalues of `X^p`.
pub fn ek_spectral(x: &SymMatrix, k: usize, p: f64) -> Result<f64> {
    let v = ek_spectral_log(x, k, p)?.value();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("e_{k} of the spectrum overflows; use ek_spectral_log")));
    }
    Ok(v)
}

/// Dense `rows x cols` matrix of full column rank, `cols <= rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct TallMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TallMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if cols == 0 || cols > rows || rows > MAX_DIM {
            return Err(Error::Shape(format!("need 1 <= cols <= rows <= {MAX_DIM}, got {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("expected {} entries, got {}", rows * cols, entries.len())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return domain("matrix entries must be finite");
        }
        let a = Self { rows, cols, entries };
        let gram = a.gram()?;
        let e = jacobi_eigen(&gram)?;
        let max = e.values.last().copied().unwrap_or(0.0);
        if !(e.min_value() > RANK_TOL * max) {
            return domain(format!("matrix is numerically rank deficient (gram eigenvalues {:?})", e.values));
        }
        Ok(a)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    fn transpose(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        t
    }

    fn gram(&self) -> Result<SymMatrix> {
        let g = matmul(&self.transpose(), &self.entries, self.cols, self.rows, self.cols);
        let mut m = SymMatrix { dim: self.cols, entries: g };
        m.symmetrize();
        Ok(m)
    }
}

/// `A^T X A`.
pub fn congruence(a: &TallMatrix, x: &SymMatrix) -> Result<SymMatrix> {
    if a.rows != x.dim {
        return Err(Error::Shape(format!("A has {} rows but X is {}x{}", a.rows, x.dim, x.dim)));
    }
    let xa = matmul(&x.entries, &a.entries, a.rows, a.rows, a.cols);
    let mut m = SymMatrix {
        dim: a.cols,
        entries: matmul(&a.transpose(), &xa, a.cols, a.rows, a.cols),
    };
    m.symmetrize();
    Ok(m)
}

/// `Q diag(lambda) Q^T` with log-uniform `lambda` in `spectrum` and `Q` a
/// product of `dim^2` Givens rotations at uniform angles.
pub fn random_spd(dim: usize, seed: u64, spectrum: (f64, f64)) -> Result<SymMatrix> {
    let (lo, hi) = spectrum;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return domain(format!("spectrum range must satisfy 0 < lo <= hi, got {spectrum:?}"));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Shape(format!("dimension must lie in 1..={MAX_DIM}, got {dim}")));
    }
    let mut rng = trial_rng(seed, "spd", &[dim as u64]);
    let lambda: Vec<f64> = (0..dim)
        .map(|_| if lo == hi { lo } else { rng.random_range(lo.ln()..hi.ln()).exp() })
        .collect();
    let mut q = vec![0.0; dim * dim];
    for i in 0..dim {
        q[i * dim + i] = 1.0;
    }
    if dim > 1 {
        for _ in 0..dim * dim {
            let i = rng.random_range(0..dim);
            let mut j = rng.random_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            for r in 0..dim {
                let (qi, qj) = (q[r * dim + i], q[r * dim + j]);
                q[r * dim + i] = c * qi - s * qj;
                q[r * dim + j] = s * qi + c * qj;
            }
        }
    }
    Eigen { values: lambda, vectors: q }.reconstruct_with(|l| l)
}

fn random_tall(rng: &mut TrialRng, rows: usize, cols: usize) -> Result<TallMatrix> {
    loop {
        let entries = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
        match TallMatrix::new(rows, cols, entries) {
            Err(Error::Domain(_)) => continue,
            other => return other,
        }
    }
}

fn spectral_inputs(a: Option<&TallMatrix>, x: &SymMatrix, y: &SymMatrix) -> TrialInputs {
    TrialInputs::Spectral {
        a: a.map(TallMatrix::to_rows),
        x: x.to_rows(),
        y: y.to_rows(),
    }
}

/// Midpoint log-convexity of `X -> e_k((A^T X A)^p)`; margin is
/// `(ln f(X) + ln f(Y))/2 - ln f((X+Y)/2)`.
pub fn check_muir_logconvex(
    a: &TallMatrix,
    x: &SymMatrix,
    y: &SymMatrix,
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    if !(-1.0..0.0).contains(&p) {
        return domain(format!("log-convexity check needs p in [-1, 0), got {p}"));
    }
    if k == 0 || k > a.cols {
        return domain(format!("need 1 <= k <= cols(A) = {}, got k = {k}", a.cols));
    }
    let f = |m: &SymMatrix| -> Result<f64> { Ok(ek_spectral_log(&congruence(a, m)?, k, p)?.ln()) };
    let lhs = f(&x.midpoint(y)?)?;
    let rhs = 0.5 * f(x)? + 0.5 * f(y)?;
    let id = if p == -1.0 { "muir" } else { "mariet" };
    Ok(InequalityReport::new(id, spectral_inputs(Some(a), x, y), lhs, rhs, rhs - lhs, tol)
        .with_params(x.dim, k, 1, p))
}

/// Midpoint concavity of `X -> 1 / e_k(lambda(X^p))`; margin is
/// `f((X+Y)/2) - f(X)/2 - f(Y)/2`.
pub fn check_ekmtx_recip_concave(
    x: &SymMatrix,
    y: &SymMatrix,
    k: usize,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    if !(p > -1.0 && p < 0.0) {
        return domain(format!("reciprocal concavity check needs p in (-1, 0), got {p}"));
    }
    if x.dim != y.dim {
        return Err(Error::Shape(format!("dimension mismatch {} vs {}", x.dim, y.dim)));
    }
    let f = |m: &SymMatrix| -> Result<f64> { Ok((-ek_spectral_log(m, k, p)?.ln()).exp()) };
    let lhs = f(&x.midpoint(y)?)?;
    let rhs = 0.5 * f(x)? + 0.5 * f(y)?;
    Ok(InequalityReport::new("ekmtx", spectral_inputs(None, x, y), lhs, rhs, lhs - rhs, tol)
        .with_params(x.dim, k, 1, p))
}

/// Re-evaluates a recorded matrix report.
pub fn replay(report: &InequalityReport) -> Result<InequalityReport> {
    let TrialInputs::Spectral { a, x, y } = &report.inputs else {
        return Err(Error::Shape("matrix report without matrix inputs".into()));
    };
    let x = SymMatrix::from_rows(x)?;
    let y = SymMatrix::from_rows(y)?;
    match (report.checker_id.as_str(), a) {
        ("ekmtx", _) => check_ekmtx_recip_concave(&x, &y, report.k, report.p, report.tolerance),
        ("muir" | "mariet", Some(a)) => {
            let a = TallMatrix::from_rows(a)?;
            check_muir_logconvex(&a, &x, &y, report.k, report.p, report.tolerance)
        }
        (id, _) => Err(Error::Config(format!("cannot replay matrix checker {id:?}"))),
    }
}

/// The three matrix checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixCheck {
    /// Log-convexity of `e_k((A^T X A)^{-1})`.
    Muir,
    /// Log-convexity of `e_k((A^T X A)^p)`, `p` in `(-1, 0)`.
    Mariet,
    /// Concavity of `1 / e_k(lambda(X^p))`, `p` in `(-1, 0)`.
    Ekmtx,
}

impl MatrixCheck {
    pub const ALL: [MatrixCheck; 3] = [MatrixCheck::Muir, MatrixCheck::Mariet, MatrixCheck::Ekmtx];

    pub fn id(self) -> &'static str {
        match self {
            MatrixCheck::Muir => "muir",
            MatrixCheck::Mariet => "mariet",
            MatrixCheck::Ekmtx => "ekmtx",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown matrix check {s:?}")))
    }

    pub fn default_p_grid(self) -> Vec<f64> {
        match self {
            MatrixCheck::Muir => vec![-1.0],
            MatrixCheck::Mariet | MatrixCheck::Ekmtx => vec![-0.9, -0.5, -0.1],
        }
    }

    pub fn in_range(self, p: f64) -> bool {
        match self {
            MatrixCheck::Muir => p == -1.0,
            MatrixCheck::Mariet | MatrixCheck::Ekmtx => p > -1.0 && p < 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub check: MatrixCheck,
    pub dims: Vec<usize>,
    pub k_policy: DegreePolicy,
    pub p_grid: Option<Vec<f64>>,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub spectrum: (f64, f64),
}

impl MatrixConfig {
    pub fn new(check: MatrixCheck) -> Self {
        Self {
            check,
            dims: vec![2, 3, 4, 6],
            k_policy: DegreePolicy::AllValid,
            p_grid: None,
            trials: 1000,
            seed: 0,
            tolerance: MATRIX_TOLERANCE,
            spectrum: (0.1, 10.0),
        }
    }

    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|d| *d == 0 || *d > MAX_DIM) {
            return Err(Error::Config(format!("dimensions must lie in 1..={MAX_DIM}")));
        }
        if let DegreePolicy::Fixed(k) = self.k_policy {
            if let Some(d) = self.dims.iter().find(|d| k == 0 || k > **d) {
                return Err(Error::Config(format!("k = {k} is not admissible at dim = {d}")));
            }
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Config("tolerance must be finite and >= 0".into()));
        }
        let (lo, hi) = self.spectrum;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!("invalid spectrum range {:?}", self.spectrum)));
        }
        let grid = self.p_grid.clone().unwrap_or_else(|| self.check.default_p_grid());
        if grid.is_empty() {
            return Err(Error::Config("p grid must not be empty".into()));
        }
        if let Some(bad) = grid.iter().find(|p| !self.check.in_range(**p)) {
            return Err(Error::Config(format!("p = {bad} is outside the range of {}", self.check.id())));
        }
        Ok(grid)
    }
}

/// One matrix trial at dimension `dim` and exponent `p`.
pub fn run_matrix_trial(config: &MatrixConfig, dim: usize, p: f64, trial_index: u64) -> Result<TrialOutcome> {
    let id = config.check.id();
    let key = [dim as u64, p.to_bits(), trial_index];
    let spd = |which: u64| {
        let seed = crate::seed::derive(config.seed, id, &[key[0], key[1], key[2], which]);
        random_spd(dim, seed, config.spectrum)
    };
    let (x, y) = (spd(0)?, spd(1)?);
    let mut rng = trial_rng(config.seed, id, &[key[0], key[1], key[2], 2]);
    let tol = config.tolerance;
    let mut reports = Vec::new();
    match config.check {
        MatrixCheck::Ekmtx => {
            for k in pick_degrees(config.k_policy, 1, dim, &mut rng) {
                reports.push(check_ekmtx_recip_concave(&x, &y, k, p, tol)?);
            }
        }
        MatrixCheck::Muir | MatrixCheck::Mariet => {
            let min_cols = match config.k_policy {
                DegreePolicy::Fixed(k) => k,
                _ => 1,
            };
            let cols = rng.random_range(min_cols..=dim);
            let a = random_tall(&mut rng, dim, cols)?;
            for k in pick_degrees(config.k_policy, 1, cols, &mut rng) {
                reports.push(check_muir_logconvex(&a, &x, &y, k, p, tol)?);
            }
        }
    }
    let reports = reports.into_iter().map(|r| r.with_trial(trial_index)).collect();
    TrialOutcome::from_reports(reports)
        .ok_or_else(|| Error::Config(format!("nothing to evaluate for {id} at dim = {dim}")))
}

/// Runs every (dim, p) cell; summary keys are `<check>/dim<d>`.
pub fn run_matrix_suite(config: &MatrixConfig) -> Result<SuiteSummary> {
    let grid = config.validate()?;
    let mut summary = SuiteSummary {
        checkers: BTreeMap::new(),
        violations: Vec::new(),
    };
    let trials = config.trials as usize;
    for &dim in &config.dims {
        let outcomes = map_indexed(grid.len() * trials, |i| {
            run_matrix_trial(config, dim, grid[i / trials], (i % trials) as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        if let Some(s) = aggregate(&outcomes) {
            summary.checkers.insert(format!("{}/dim{dim}", config.check.id()), s);
        }
        summary
            .violations
            .extend(outcomes.into_iter().flat_map(|o| o.failures));
    }
    Ok(summary)
}
