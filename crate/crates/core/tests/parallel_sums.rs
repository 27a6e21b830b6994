mod common;

use proptest::prelude::*;
use rand::Rng;
use symineq::parsum::{anderson_psi, anderson_psi_recursive, hessian_p_par_sum, p_par_sum, PExponent};
use symineq::seed::trial_rng;
use symineq::sympoly::PositiveVector;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn anderson_identity(x in (2usize..=8).prop_flat_map(|n| prop::collection::vec(0.01f64..100.0, n..=n)), kf in 0.0f64..1.0) {
        let n = x.len();
        let k = 2 + ((n - 1) as f64 * kf) as usize;
        let k = k.min(n);
        let v = PositiveVector::new(x).unwrap();
        let (a, b) = (anderson_psi_recursive(&v, k).unwrap(), anderson_psi(&v, k).unwrap());
        prop_assert!(common::rel_err(a, b) <= 1e-10, "{a} vs {b}");
    }

    #[test]
    fn p_par_sum_is_symmetric_and_homogeneous(x in 0.01f64..100.0, y in 0.01f64..100.0, p in -1.0f64..3.0, t in 0.01f64..100.0) {
        prop_assume!(p.abs() > 1e-6);
        let e = PExponent::bivariate(p).unwrap();
        let s = p_par_sum(x, y, e).unwrap();
        prop_assert_eq!(s, p_par_sum(y, x, e).unwrap());
        prop_assert!(common::rel_err(p_par_sum(t * x, t * y, e).unwrap(), t * s) <= 1e-13);
    }

    #[test]
    fn p_par_sum_is_midpoint_concave(x in 0.01f64..100.0, y in 0.01f64..100.0, u in 0.01f64..100.0, w in 0.01f64..100.0, p in -1.0f64..3.0) {
        prop_assume!(p.abs() > 1e-6);
        let e = PExponent::bivariate(p).unwrap();
        let mid = p_par_sum(0.5 * (x + u), 0.5 * (y + w), e).unwrap();
        let avg = 0.5 * p_par_sum(x, y, e).unwrap() + 0.5 * p_par_sum(u, w, e).unwrap();
        prop_assert!(mid >= avg - 1e-12 * mid.max(avg));
    }
}

#[test]
fn hessian_matches_high_precision_differences() {
    let mut cc = common::consts();
    let mut rng = trial_rng(1, "hessian-test", &[]);
    for _ in 0..200 {
        let scale = common::log_uniform(&mut rng, 1e-3, 1e3);
        let x = scale * common::log_uniform(&mut rng, 0.3, 3.0);
        let y = scale * common::log_uniform(&mut rng, 0.3, 3.0);
        let p = rng.random_range(-1.0..=3.0);
        if p == 0.0 {
            continue;
        }
        let h = hessian_p_par_sum(x, y, PExponent::bivariate(p).unwrap()).unwrap();
        let fd = common::fd_hessian(x, y, p, &mut cc);
        let floor = 1e-14 * p_par_sum(x, y, PExponent::bivariate(p).unwrap()).unwrap() / (x.max(y) * x.max(y));
        for i in 0..2 {
            for j in 0..2 {
                let err = (h[i][j] - fd[i][j]).abs();
                assert!(err <= 1e-6 * fd[i][j].abs() + floor, "({x}, {y}, {p}) entry {i}{j}: {} vs {}", h[i][j], fd[i][j]);
            }
        }
    }
}
