//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use rand::Rng;

/// Working precision of the high-precision oracles, in bits.
pub const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Sum with Neumaier compensation.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

/// `e_0..=e_n` by enumerating every subset.
pub fn subset_elem_sym(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n <= 20, "subset oracle is exponential");
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for mask in 0u32..(1 << n) {
        let prod = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).product::<f64>();
        buckets[mask.count_ones() as usize].push(prod);
    }
    buckets.into_iter().map(compensated_sum).collect()
}

/// `h_k` by enumerating nondecreasing index tuples.
pub fn multiset_complete_hom(x: &[f64], k: usize) -> f64 {
    fn walk(x: &[f64], start: usize, left: usize, prod: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push(prod);
            return;
        }
        for i in start..x.len() {
            walk(x, i, left - 1, prod * x[i], out);
        }
    }
    let mut terms = Vec::new();
    walk(x, 0, k, 1.0, &mut terms);
    compensated_sum(terms)
}

pub fn big(v: f64) -> BigFloat {
    BigFloat::from_f64(v, PREC)
}

pub fn to_f64(v: &BigFloat, cc: &mut Consts) -> f64 {
    let s = v.format(Radix::Dec, RM, cc).expect("format");
    s.parse().unwrap_or_else(|_| panic!("unparseable {s}"))
}

/// `h_0..=h_kmax` from `h_k(x_1..x_m) = sum_i x_m^i h_{k-i}(x_1..x_{m-1})`,
/// carried out in 256-bit arithmetic.
pub fn hp_complete_hom(x: &[f64], kmax: usize, cc: &mut Consts) -> Vec<f64> {
    let mut h: Vec<BigFloat> = (0..=kmax).map(|k| big(if k == 0 { 1.0 } else { 0.0 })).collect();
    for &v in x {
        let bv = big(v);
        let mut powers = vec![big(1.0)];
        for i in 1..=kmax {
            let next = powers[i - 1].mul(&bv, PREC, RM);
            powers.push(next);
        }
        let next: Vec<BigFloat> = (0..=kmax)
            .map(|k| {
                (0..=k).fold(big(0.0), |acc, i| acc.add(&powers[i].mul(&h[k - i], PREC, RM), PREC, RM))
            })
            .collect();
        h = next;
    }
    h.iter().map(|b| to_f64(b, cc)).collect()
}

/// `(x^{-p} + y^{-p})^{-1/p}` in 256-bit arithmetic.
pub fn hp_p_par_sum(x: &BigFloat, y: &BigFloat, p: f64, cc: &mut Consts) -> BigFloat {
    let mp = big(-p);
    let s = x.pow(&mp, PREC, RM, cc).add(&y.pow(&mp, PREC, RM, cc), PREC, RM);
    s.pow(&big(-1.0 / p), PREC, RM, cc)
}

/// Central second differences of the p-parallel sum with step `1e-5 max(x, y)`,
/// every function value and difference evaluated in 256-bit arithmetic.
pub fn fd_hessian(x: f64, y: f64, p: f64, cc: &mut Consts) -> [[f64; 2]; 2] {
    let h = 1e-5 * x.max(y);
    let (bx, by, bh) = (big(x), big(y), big(h));
    let mut f = |dx: i32, dy: i32| {
        let sx = bx.add(&bh.mul(&big(dx as f64), PREC, RM), PREC, RM);
        let sy = by.add(&bh.mul(&big(dy as f64), PREC, RM), PREC, RM);
        hp_p_par_sum(&sx, &sy, p, cc)
    };
    let f00 = f(0, 0);
    let two_f00 = f00.mul(&big(2.0), PREC, RM);
    let h2 = bh.mul(&bh, PREC, RM);
    let fxx = f(1, 0).sub(&two_f00, PREC, RM).add(&f(-1, 0), PREC, RM).div(&h2, PREC, RM);
    let fyy = f(0, 1).sub(&two_f00, PREC, RM).add(&f(0, -1), PREC, RM).div(&h2, PREC, RM);
    let fxy = f(1, 1)
        .sub(&f(1, -1), PREC, RM)
        .sub(&f(-1, 1), PREC, RM)
        .add(&f(-1, -1), PREC, RM)
        .div(&h2.mul(&big(4.0), PREC, RM), PREC, RM);
    let (a, b, c) = (to_f64(&fxx, cc), to_f64(&fxy, cc), to_f64(&fyy, cc));
    [[a, b], [b, c]]
}

pub fn consts() -> Consts {
    Consts::new().expect("astro-float constants")
}

/// Log-uniform draw in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..=hi.ln()).exp()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Eigenvalues of a symmetric 2x2 matrix.
pub fn sym2_eigenvalues(m: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let d = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[0][1]).sqrt();
    (mean - d, mean + d)
}
