use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use ultrajoris::weight_core::{
    check_gamma_domination, counting_functions, dyadic_grid, h_log, mg_estimate, t_zero, Mode, WeightError, WeightSequence,
};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Gevrey index `a/b` in `[1, 4]`.
fn gevrey() -> impl Strategy<Value = WeightSequence> {
    (1i64..=3, 0i64..=3).prop_map(|(b, extra)| {
        let a = b + extra * b / 3 + extra.min(1);
        WeightSequence::gevrey(&format!("{}/{}", a.min(4 * b), b))
    })
}

/// `t ∈ (0, 10]` as `n / 2^e`.
fn t_value() -> impl Strategy<Value = BigRational> {
    (1i64..=80, 0u32..=24).prop_map(|(n, e)| {
        let t = BigRational::new(BigInt::from(n), BigInt::from(2).pow(e + 3));
        t.min(rat(10, 1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_functions_agree_for_log_convex(m in gevrey(), t in t_value()) {
        // only sequences with a finite minimizer at t are in scope
        let counts = counting_functions(&m, &t);
        prop_assume!(!matches!(counts, Err(WeightError::NoFiniteMinimizer { .. })));
        let (upper, lower) = counts.unwrap();
        prop_assert!(lower <= upper);
        prop_assert_eq!(lower, upper);
    }

    #[test]
    fn h_is_nondecreasing_and_at_most_one(m in gevrey(), t in t_value(), factor in 1i64..=64) {
        let a = h_log(&m, &t).unwrap();
        let b = h_log(&m, &(&t * rat(factor, 1))).unwrap();
        prop_assert!(a.lo <= b.hi);
        prop_assert!(a.lo <= 0.0 && b.lo <= 0.0);
    }

    #[test]
    fn h_is_one_past_t_zero(m in gevrey(), bump in 1i64..=16) {
        let (r, b) = t_zero(&m).unwrap();
        // T₀ = r^(1/b) ≤ r when r ≥ 1, which holds for Gevrey sequences
        let t = r * rat(bump, 1);
        prop_assert!(b >= 1);
        let h = h_log(&m, &t).unwrap();
        prop_assert!(h.contains(0.0, 0.0), "{}", h);
    }

    #[test]
    fn self_domination_for_any_c(m in gevrey(), e in 0u32..=8) {
        let c = BigRational::from_integer(BigInt::from(2).pow(e));
        let r = check_gamma_domination(&m, &m, &c, &dyadic_grid(20), Mode::R).unwrap();
        prop_assert!(r.holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mg_is_monotone_in_the_horizon(m in gevrey(), n in gevrey()) {
        let mut prev: Option<ultrajoris::exact::Interval> = None;
        for h in [8, 32, 128] {
            let est = mg_estimate(&m, &n, h).unwrap().estimate;
            if let Some(p) = prev {
                prop_assert!(p.lo <= est.hi);
            }
            prev = Some(est);
        }
    }

    #[test]
    fn mg_of_a_sequence_with_itself_is_symmetric(m in gevrey(), h in 4u64..=96) {
        let est = mg_estimate(&m, &m, h).unwrap();
        let (j, k) = est.attained_at;
        let level = |a: u64, b: u64| {
            let ln = |i: u64| m.ln_big_m(i as u128).unwrap();
            (ln(a + b) - ln(a) - ln(b)).scale(1.0 / (a + b) as f64)
        };
        // the swapped pair reaches the same value
        prop_assert!(level(j, k).overlaps(&est.log_estimate));
        prop_assert!(level(k, j).overlaps(&est.log_estimate));
    }
}
