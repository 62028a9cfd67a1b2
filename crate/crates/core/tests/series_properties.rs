use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use ultrajoris::exact::Coefficient;
use ultrajoris::series_algebra::{
    construct_identity, mat_vec, nullspace_over_laurent, verify_identity, AnalyticGerm, IdentitySearch,
    TruncatedSeries,
};

const T: i64 = 32;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn coeff() -> impl Strategy<Value = Coefficient> {
    (-9i64..=9, 1i64..=5, prop::bool::weighted(0.2), -3i64..=3).prop_map(|(n, d, complex, im)| {
        let im = if complex { rat(im, d) } else { rat(0, 1) };
        Coefficient::new(rat(n, d), im)
    })
}

fn series(start: i64, len: usize) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(coeff(), 1..=len).prop_map(move |c| TruncatedSeries::new(start, c, T))
}

fn unit() -> impl Strategy<Value = TruncatedSeries> {
    (series(0, 12), 1i64..=5).prop_map(|(s, a)| {
        let c0 = s.coeff(0).unwrap_or_else(Coefficient::zero);
        s.add_constant(&(Coefficient::from_integer(a) - c0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unit_inverse_round_trip(a in unit()) {
        let inv = a.invert_unit().unwrap();
        prop_assert_eq!(a.mul(&inv), TruncatedSeries::one(T));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms_hold_exactly(a in series(0, 16), b in series(1, 16), c in series(0, 16)) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn compositional_inverse_both_ways(s in series(2, 10), lead in 1i64..=4) {
        let f = s.add(&TruncatedSeries::monomial(Coefficient::from_integer(lead), 1, T));
        let g = f.compositional_inverse().unwrap();
        prop_assert_eq!(f.compose(&g).unwrap(), TruncatedSeries::var(T));
        prop_assert_eq!(g.compose(&f).unwrap(), TruncatedSeries::var(T));
    }

    #[test]
    fn residue_classes_reassemble(s in series(0, 31), p in 1i64..=7) {
        let parts = s.residue_decompose(p);
        prop_assert_eq!(parts.len() as i64, p);
        prop_assert_eq!(TruncatedSeries::reassemble(&parts), s);
    }

    #[test]
    fn nullspace_vectors_multiply_back_to_zero(
        entries in prop::collection::vec((series(0, 4), 0i64..3), 6),
    ) {
        // 2 × 3 matrix over Laurent series, so the nullspace is nontrivial
        let cells: Vec<TruncatedSeries> = entries
            .into_iter()
            .map(|(s, shift)| s.truncate(16).shift(shift))
            .collect();
        let matrix = vec![cells[0..3].to_vec(), cells[3..6].to_vec()];
        let basis = nullspace_over_laurent(&matrix).unwrap();
        prop_assert!(!basis.is_empty());
        for v in &basis {
            for r in mat_vec(&matrix, v) {
                prop_assert!(r.is_zero(), "row residual {:?}", r);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaled_germ_still_certifies(p in 2i64..=7, q in 3i64..=7, num in -7i64..=7, den in 1i64..=4) {
        prop_assume!(p < q && p.gcd(&q) == 1 && num != 0);
        let c = Coefficient::real(rat(num, den));
        let phi = TruncatedSeries::monomial(c, q, 64);
        let germ = AnalyticGerm::monomial_pair(p, phi).unwrap();
        let id = construct_identity(&germ, 64, &IdentitySearch::default()).unwrap();
        prop_assert!(verify_identity(&id, &germ, 64).certified);
    }
}
