use num_integer::Integer;
use ultrajoris::exact::Coefficient;
use ultrajoris::series_algebra::{
    coin_representation, construct_identity, preprocess_germ, support_gcd, verify_identity, AnalyticGerm,
    IdentitySearch, SeriesError, TruncatedSeries,
};

fn mono(e: i64, t: i64) -> TruncatedSeries {
    TruncatedSeries::monomial(Coefficient::from_integer(1), e, t)
}

#[test]
fn coprime_monomial_pairs_certify() {
    for p in 2..=7i64 {
        for q in (p + 1)..=7 {
            if p.gcd(&q) != 1 {
                continue;
            }
            let germ = AnalyticGerm::monomial_pair(p, mono(q, 64)).unwrap();
            let id = construct_identity(&germ, 64, &IdentitySearch::default()).unwrap();
            assert!(id.certified && id.residual_valuation >= 64, "p={p} q'={q}");
            assert!(verify_identity(&id, &germ, 64).certified);
            let target = (1 + p * id.q) as u64;
            assert!(coin_representation(target, p as u64, q as u64).unwrap().is_some());
        }
    }
}

#[test]
fn three_components_collapse_and_certify() {
    let raw = [mono(2, 64), mono(3, 64), mono(7, 64)];
    let germ = AnalyticGerm::from_polynomials(&raw, 1).unwrap();
    assert_eq!(germ.gamma, vec![1, 1]);
    let id = construct_identity(&germ, 64, &IdentitySearch::default()).unwrap();
    assert!(id.residual_valuation >= 64);
}

#[test]
fn gcd_gate_reports_the_gcd() {
    let raw = [mono(6, 64), mono(9, 64), mono(15, 64)];
    let germ = AnalyticGerm::from_polynomials(&raw, 1).unwrap();
    assert_eq!(support_gcd(&germ).0, 3);
    assert_eq!(
        construct_identity(&germ, 64, &IdentitySearch::default()).unwrap_err(),
        SeriesError::GcdViolation { gcd: 3 }
    );
}

#[test]
fn reparametrized_germ_certifies() {
    // (t² + t³, t³) needs a reparametrization before the identity exists
    let first = TruncatedSeries::from_ints(2, &[1, 1], 40);
    let germ = preprocess_germ(&[first, mono(3, 40)], 1).unwrap();
    let id = construct_identity(&germ, 24, &IdentitySearch::default()).unwrap();
    assert!(id.certified);
}
