use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use ultrajoris::joris_numeric::{polarization_check, seminorm, sup_norm_ellipse, ComplexPoly, MultiPoly, TestFunction1D};
use ultrajoris::weight_core::WeightSequence;

fn test_function() -> impl Strategy<Value = TestFunction1D> {
    prop_oneof![
        Just("exp".to_string()),
        Just("expm1".to_string()),
        (1u32..=7).prop_map(|a| format!("abs:{a}")),
        prop::collection::vec(-5i64..=5, 1..=6)
            .prop_map(|c| format!("poly:{}", c.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))),
    ]
    .prop_map(|s| TestFunction1D::parse(&s).unwrap())
}

fn gevrey() -> impl Strategy<Value = WeightSequence> {
    prop::sample::select(vec!["1", "3/2", "2", "3"]).prop_map(WeightSequence::gevrey)
}

fn complex_poly() -> impl Strategy<Value = ComplexPoly> {
    prop::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 1..=6)
        .prop_map(|c| ComplexPoly::new(c.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn seminorm_grows_with_order_and_shrinks_with_rho(
        f in test_function(),
        m in gevrey(),
        k in 0u32..=10,
        rho in 0.25f64..=4.0,
    ) {
        let at = |k_max: u32, rho: f64| seminorm(&f, (-1.0, 1.0), &m, rho, k_max, 41).unwrap().value;
        let (a, b) = (at(k, rho), at(k + 3, rho));
        prop_assert!(a.lo <= b.hi, "{a} vs {b}");
        let wider = at(k, 2.0 * rho);
        prop_assert!(wider.lo <= a.hi, "{wider} vs {a}");
    }

    #[test]
    fn ellipse_sup_grows_with_eps(g in complex_poly(), eps in 0.0f64..=1.5, step in 0.01f64..=1.0) {
        let a = sup_norm_ellipse(&g, eps, 512);
        let b = sup_norm_ellipse(&g, eps + step, 512);
        prop_assert!(a.lo <= b.hi);
    }

    #[test]
    fn ellipse_sup_of_monomial_is_cosh_power(k in 0usize..=8, eps in 0.0f64..=2.0) {
        let s = sup_norm_ellipse(&ComplexPoly::monomial(k, Complex64::new(1.0, 0.0)), eps, 1024);
        let want = eps.cosh().powi(k as i32);
        prop_assert!(s.contains(want, 1e-12 * want), "{s} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polarization_margins_are_nonnegative(seed in 0u64..10_000, d in 1usize..=3, k in 1u32..=5) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = MultiPoly::random(d, k.max(3), &mut rng);
        let x: Vec<f64> = (0..d).map(|i| 0.3 - 0.2 * i as f64).collect();
        let r = polarization_check(&f, &x, k, 64).unwrap();
        prop_assert!(r.lower >= -1e-6 && r.upper >= -1e-6, "{r:?}");
    }
}
