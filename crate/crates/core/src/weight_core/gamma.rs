//! The associated function `h_m(t) = inf_k m_k t^k` and the counting
//! functions `Γ̄_m` (first minimizer) and `Γ̲_m` (first ratio ≥ 1/t).

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::exact::{ln_rational, rational_pow, Interval};

use super::family::TailBehavior;
use super::sequence::{root_string, WeightSequence};
use super::WeightError;

/// Minimizers up to this index also get an exact value for `h`.
pub const EXACT_H_LIMIT: u128 = 2048;

/// Galloping stops here; a minimizer further out is treated as missing.
const GALLOP_CAP: u128 = 1 << 120;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HGamma {
    pub t: String,
    /// Exact `h` as `p/q` or `(r)^(1/b)` when the minimizer is small.
    pub h: Option<String>,
    #[serde(skip)]
    pub h_radicand: Option<(BigRational, u32)>,
    /// Enclosure of `ln h`.
    pub h_log: Interval,
    pub gamma_upper: u128,
    pub gamma_lower: u128,
    /// False when only a finite table was scanned.
    pub certified: bool,
}

impl HGamma {
    /// Exact `h` when it is rational.
    pub fn h_rational(&self) -> Option<&BigRational> {
        match &self.h_radicand {
            Some((r, 1)) => Some(r),
            _ => None,
        }
    }
}

/// Smallest `k ≥ lo` with `pred(k)`, for `pred` monotone on `[lo, ∞)`.
fn gallop(lo: u128, mut pred: impl FnMut(u128) -> Result<bool, WeightError>) -> Result<Option<u128>, WeightError> {
    if pred(lo)? {
        return Ok(Some(lo));
    }
    let mut bad = lo;
    let mut step: u128 = 1;
    let good = loop {
        let probe = lo + step;
        if probe > GALLOP_CAP {
            return Ok(None);
        }
        if pred(probe)? {
            break probe;
        }
        bad = probe;
        step *= 2;
    };
    let (mut lo, mut hi) = (bad, good);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `(m_k t^k)^index` exactly.
fn value_radicand(seq: &WeightSequence, k: u64, t: &BigRational) -> Result<BigRational, WeightError> {
    Ok(seq.m_radicand(k)? * rational_pow(t, k * seq.index() as u64))
}

fn value_log(seq: &WeightSequence, k: u128, t: &BigRational) -> Result<Interval, WeightError> {
    Ok(seq.ln_m(k)? + Interval::from_u128(k) * ln_rational(t))
}

fn finish(
    seq: &WeightSequence,
    t: &BigRational,
    upper: u128,
    lower: u128,
    certified: bool,
) -> Result<HGamma, WeightError> {
    let b = seq.index();
    let (h, h_radicand, h_log) = if upper <= EXACT_H_LIMIT {
        let r = value_radicand(seq, upper as u64, t)?;
        let log = ln_rational(&r).scale(1.0 / b as f64);
        let log = if b == 1 { log } else { widen(log) };
        (Some(root_string(&r, b)), Some((r, b)), log)
    } else {
        (None, None, value_log(seq, upper, t)?)
    };
    Ok(HGamma {
        t: t.to_string(),
        h,
        h_radicand,
        h_log,
        gamma_upper: upper,
        gamma_lower: lower,
        certified,
    })
}

fn widen(iv: Interval) -> Interval {
    Interval::new(iv.lo.next_down().next_down(), iv.hi.next_up().next_up())
}

/// Scans a finite table; the result is never certified.
fn table_scan(seq: &WeightSequence, t: &BigRational, limit: u64) -> Result<HGamma, WeightError> {
    let thr = rational_pow(&t.recip(), seq.index() as u64);
    let mut best: Option<(u64, BigRational)> = None;
    let mut lower = None;
    for k in 0..limit {
        let v = value_radicand(seq, k, t)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((k, v));
        }
        if lower.is_none() && k + 1 < limit && seq.ratio_radicand(k as u128)? >= thr {
            lower = Some(k);
        }
    }
    let (upper, _) = best.expect("nonempty table");
    let lower = lower.unwrap_or(limit.saturating_sub(1)).min(upper);
    finish(seq, t, upper as u128, lower as u128, false)
}

/// `h_m(t)` with both counting functions.
///
/// Families with a monotone tail are certified: the ratio `m_{k+1}/m_k` is
/// nondecreasing from `k0` on, so past `k0` the minimum sits at the first
/// index where the ratio reaches `1/t`, found by galloping search.
pub fn h_and_gamma(seq: &WeightSequence, t: &BigRational) -> Result<HGamma, WeightError> {
    let (upper, lower) = locate(seq, t)?;
    finish(seq, t, upper, lower, true)
}

/// `(Γ̄_m(t), Γ̲_m(t))` without evaluating `h`.
pub fn counting_functions(seq: &WeightSequence, t: &BigRational) -> Result<(u128, u128), WeightError> {
    locate(seq, t)
}

fn locate(seq: &WeightSequence, t: &BigRational) -> Result<(u128, u128), WeightError> {
    if !t.is_positive() {
        return Err(WeightError::InvalidSpec(format!("t must be positive, got {t}")));
    }
    let b = seq.index() as u64;
    let thr = rational_pow(&t.recip(), b);
    let tail = seq.tail();
    let k0 = match &tail {
        TailBehavior::Unknown => {
            let partial = table_scan(seq, t, seq.horizon().unwrap_or(1))?;
            return Err(WeightError::NonCertifiableTail {
                partial: Box::new(partial),
            });
        }
        TailBehavior::MonotoneBounded { k0, sup_ratio } => {
            if rational_pow(sup_ratio, b) < thr {
                return Err(WeightError::NoFiniteMinimizer { t: t.to_string() });
            }
            *k0
        }
        TailBehavior::MonotoneUnbounded { k0 } => *k0,
    };
    let ge = |k: u128| -> Result<bool, WeightError> { Ok(seq.ratio_radicand(k)? >= thr) };

    let mut lower = None;
    for k in 0..k0 {
        if ge(k as u128)? {
            lower = Some(k as u128);
            break;
        }
    }
    let kstar = match gallop(k0 as u128, ge) {
        Ok(Some(k)) => k,
        Ok(None) => return Err(WeightError::NoFiniteMinimizer { t: t.to_string() }),
        Err(WeightError::BeyondHorizon { horizon, .. }) => {
            let partial = table_scan(seq, t, horizon)?;
            return Err(WeightError::NonCertifiableTail {
                partial: Box::new(partial),
            });
        }
        Err(e) => return Err(e),
    };
    let lower = lower.unwrap_or(kstar);
    let upper = if k0 == 0 {
        kstar
    } else {
        // the prefix may hold an earlier (or equal) minimum
        let mut best = kstar;
        if kstar <= EXACT_H_LIMIT {
            let mut best_v = value_radicand(seq, kstar as u64, t)?;
            for k in 0..k0.min(kstar as u64) {
                let v = value_radicand(seq, k, t)?;
                if v <= best_v && (v < best_v || (k as u128) < best) {
                    best = k as u128;
                    best_v = v;
                }
            }
        } else {
            let mut best_v = value_log(seq, kstar, t)?;
            for k in 0..k0 {
                let v = value_log(seq, k as u128, t)?;
                if v.hi < best_v.lo || (v.overlaps(&best_v) && value_radicand(seq, k, t)?.is_one()) {
                    best = k as u128;
                    best_v = v;
                }
            }
        }
        best
    };
    Ok((upper, lower))
}

/// Enclosure of `ln h_m(t)`; `-∞` when `h_m(t) = 0` (no minimizer because
/// the ratios stay below `1/t`).
pub fn h_log(seq: &WeightSequence, t: &BigRational) -> Result<Interval, WeightError> {
    match locate(seq, t) {
        Ok((upper, _)) => value_log(seq, upper, t),
        Err(WeightError::NoFiniteMinimizer { .. }) => match seq.tail() {
            TailBehavior::MonotoneBounded { sup_ratio, .. }
                if rational_pow(&sup_ratio, seq.index() as u64)
                    < rational_pow(&t.recip(), seq.index() as u64) =>
            {
                Ok(Interval::neg_infinity())
            }
            _ => Err(WeightError::NoFiniteMinimizer { t: t.to_string() }),
        },
        Err(e) => Err(e),
    }
}

/// `T₀ = 1/m_1`, past which `h_m ≡ 1` for log-convex `m`; returned as
/// `(radicand, index)` with `T₀ = radicand^(1/index)`.
pub fn t_zero(seq: &WeightSequence) -> Result<(BigRational, u32), WeightError> {
    Ok((seq.m_radicand(1)?.recip(), seq.index()))
}

/// The default grid `{2^{-i} : 0 ≤ i ≤ 40}`.
pub fn default_t_grid() -> Vec<BigRational> {
    dyadic_grid(40)
}

pub fn dyadic_grid(max_i: u32) -> Vec<BigRational> {
    (0..=max_i)
        .map(|i| BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), i as usize)))
        .collect()
}

/// Whether `h = 1` exactly (the minimizer is `k = 0`).
pub fn is_saturated(r: &HGamma) -> bool {
    r.gamma_upper == 0 && r.h_radicand.as_ref().is_some_and(|(v, _)| v.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gevrey_two_examples() {
        let g = WeightSequence::gevrey("2");
        let r = h_and_gamma(&g, &q(1, 3)).unwrap();
        assert_eq!((r.h.as_deref(), r.gamma_upper, r.gamma_lower), (Some("2/9"), 2, 2));
        let r = h_and_gamma(&g, &q(2, 1)).unwrap();
        assert_eq!((r.h.as_deref(), r.gamma_upper, r.gamma_lower), (Some("1"), 0, 0));
        let r = h_and_gamma(&g, &q(1, 4)).unwrap();
        assert_eq!((r.h.as_deref(), r.gamma_upper, r.gamma_lower), (Some("3/32"), 3, 3));
    }

    #[test]
    fn huge_minimizers_are_located() {
        let g = WeightSequence::gevrey("3/2");
        let t = BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), 40));
        let r = h_and_gamma(&g, &t).unwrap();
        // (k+1)^{1/2} ≥ 2^40
        assert_eq!(r.gamma_upper, (1u128 << 80) - 1);
        assert!(r.h.is_none());
        assert!(r.h_log.hi < 0.0 && r.h_log.width() < 1e-6 * r.h_log.lo.abs());
    }

    #[test]
    fn analytic_weight_has_no_minimizer_below_one() {
        let g = WeightSequence::gevrey("1");
        assert!(matches!(h_and_gamma(&g, &q(1, 2)), Err(WeightError::NoFiniteMinimizer { .. })));
        assert_eq!(h_log(&g, &q(1, 2)).unwrap(), Interval::neg_infinity());
        assert_eq!(h_and_gamma(&g, &q(1, 1)).unwrap().gamma_upper, 0);
    }

    #[test]
    fn non_monotone_prefix() {
        // b² < 2: ratios dip before they start growing
        let s = WeightSequence::parse("sqexp:11/10").unwrap();
        for i in 0..8 {
            let t = q(1, 1 << i);
            let r = h_and_gamma(&s, &t).unwrap();
            let brute = (0..70u64)
                .map(|k| (k, s.m_radicand(k).unwrap() * crate::exact::rational_pow(&t, k)))
                .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            assert_eq!(r.gamma_upper, brute.0 as u128, "t=2^-{i}");
            assert!(r.gamma_lower <= r.gamma_upper);
        }
    }

    #[test]
    fn raw_tables_are_not_certified() {
        // m_k = 2^k
        let s = WeightSequence::parse("table:1,2,8,48,384").unwrap();
        match h_and_gamma(&s, &q(1, 4)) {
            Err(WeightError::NonCertifiableTail { partial }) => {
                assert!(!partial.certified);
                assert_eq!(partial.gamma_upper, 4);
            }
            other => panic!("{other:?}"),
        }
        let s = WeightSequence::parse("table:1,2,8,48,384;log-convex").unwrap();
        let r = h_and_gamma(&s, &q(1, 2)).unwrap();
        assert!(r.certified);
        assert_eq!((r.gamma_upper, r.gamma_lower), (0, 0));
        assert!(matches!(h_and_gamma(&s, &q(1, 4)), Err(WeightError::NonCertifiableTail { .. })));
    }
}
