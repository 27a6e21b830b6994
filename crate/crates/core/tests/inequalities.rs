use proptest::prelude::*;
use symineq::cli::{parse_report, to_json};
use symineq::funcs::{elem_root, hom_root, phi};
use symineq::verify::{
    check_dresher_scalar, check_mixed_minkowski, check_recip_concave, check_subadditive, check_superadditive,
    replay, run_suite, search_counterexample, Checker, DegreePolicy, DresherForm, SearchRegion, TrialConfig,
};
use symineq::sympoly::PositiveVector;

fn pair(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| {
        (
            prop::collection::vec(-4.6f64..4.6, n..=n),
            prop::collection::vec(-4.6f64..4.6, n..=n),
        )
    })
    .prop_map(|(a, b)| (a.into_iter().map(f64::exp).collect(), b.into_iter().map(f64::exp).collect()))
}

fn v(x: &[f64]) -> PositiveVector {
    PositiveVector::from_slice(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn margin_is_symmetric_in_the_pair((x, y) in pair(2..=8), p in 0.05f64..1.0, kf in 0.0f64..1.0) {
        let k = 1 + ((x.len() - 1) as f64 * kf) as usize;
        let (x, y) = (v(&x), v(&y));
        let a = check_superadditive("ml-new", |t| phi(t, k, p), &x, &y, 1e-9).unwrap();
        let b = check_superadditive("ml-new", |t| phi(t, k, p), &y, &x, 1e-9).unwrap();
        prop_assert!((a.margin - b.margin).abs() <= 1e-13 * a.lhs.abs().max(1.0));
    }

    #[test]
    fn pass_is_scale_invariant((x, y) in pair(2..=8), p in 1.0f64..3.0, k in 1usize..=6) {
        let (x, y) = (v(&x), v(&y));
        let base = check_subadditive("hk-root", |t| hom_root(t, k, p), &x, &y, 1e-9).unwrap();
        for t in [1e-3, 1e3] {
            let r = check_subadditive("hk-root", |s| hom_root(s, k, p), &x.scale(t).unwrap(), &y.scale(t).unwrap(), 1e-9).unwrap();
            prop_assert_eq!(r.pass, base.pass);
        }
    }

    #[test]
    fn equal_arguments_give_equality((x, _) in pair(2..=8), p in 0.05f64..1.0, kf in 0.0f64..1.0) {
        let k = 1 + ((x.len() - 1) as f64 * kf) as usize;
        let x = v(&x);
        let r = check_superadditive("ek-root", |t| elem_root(t, k, p), &x, &x, 1e-9).unwrap();
        prop_assert!(r.margin.abs() <= 1e-12 * r.lhs.abs().max(r.rhs.abs()).max(1.0));
    }

    #[test]
    fn recip_holds_when_exponent_times_degree_at_most_one((x, y) in pair(2..=8), kf in 0.0f64..1.0, pf in 0.0f64..1.0) {
        let n = x.len();
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let p = -(0.01 + 0.99 * pf) / k as f64;
        let r = check_recip_concave(&v(&x), &v(&y), k, p, 1e-9).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn dresher_forms_hold(a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0, d in 0.0f64..10.0, k in 2usize..=8, p in 1.0f64..4.0) {
        prop_assume!(a + b + c + d > 0.0);
        for form in [DresherForm::Ratio, DresherForm::Dresher] {
            let r = check_dresher_scalar(a, b, c, d, k, p, form, 1e-9).unwrap();
            prop_assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn mixed_minkowski_holds_on_vectors((x, y) in pair(1..=8), k in 1usize..=6, p in 1.0f64..3.0) {
        let col = |v: &[f64]| v.iter().map(|e| vec![*e]).collect::<Vec<_>>();
        let r = check_mixed_minkowski(&col(&x), &col(&y), k, p, 1e-9).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }
}

#[test]
fn recorded_violations_replay_bit_exactly_through_json() {
    let config = TrialConfig {
        trials: 300,
        seed: 5,
        ..TrialConfig::default()
    };
    let summary = run_suite(&config, &[Checker::RecipEk]).unwrap();
    assert!(!summary.violations.is_empty());
    let text = to_json(&summary.violations).unwrap();
    let parsed: Vec<symineq::verify::InequalityReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, summary.violations);
    for r in &parsed {
        let again = replay(r).unwrap();
        assert_eq!(again.margin.to_bits(), r.margin.to_bits());
        assert_eq!(&again, r);
    }
    assert!(parse_report("{}").is_err());
}

#[test]
fn summaries_do_not_depend_on_thread_count() {
    let config = TrialConfig {
        trials: 200,
        seed: 11,
        k_policy: DegreePolicy::Random,
        ..TrialConfig::default()
    };
    let checkers = [Checker::BigPhi, Checker::RecipEk, Checker::MixedMinkowski];
    let one = symineq::exec::with_threads(Some(1), || run_suite(&config, &checkers).unwrap());
    let four = symineq::exec::with_threads(Some(4), || run_suite(&config, &checkers).unwrap());
    assert_eq!(to_json(&one).unwrap(), to_json(&four).unwrap());
}

#[test]
fn search_regions() {
    let found = |region: &SearchRegion, budget| search_counterexample(region, budget, 3).unwrap();
    let mut r = SearchRegion::new(Checker::MixedMinkowski, 3, 2, 2.0);
    assert!(search_counterexample(&r, 10, 0).is_err());
    r.cols = 3;
    assert!(found(&r, 2000).unwrap().margin < -1e-2);
    let r = SearchRegion::new(Checker::RecipEk, 3, 2, 0.5);
    assert!(found(&r, 2000).is_some());
    let r = SearchRegion::new(Checker::Dresher, 1, 3, 0.5);
    assert!(found(&r, 2000).is_some());
    let r = SearchRegion::new(Checker::BigPhi, 3, 3, 1.5);
    assert!(search_counterexample(&r, 10, 0).is_ok());
    let r = SearchRegion::new(Checker::HkRoot, 3, 2, 0.5);
    assert!(search_counterexample(&r, 10, 0).is_err());
}
