//! Finite-horizon estimates of `mg(M, N) = sup_{j+k≥1} (M_{j+k}/(N_j N_k))^{1/(j+k)}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::exact::Interval;

use super::sequence::WeightSequence;
use super::WeightError;

/// `mg < ∞` is read as `estimate ≤ 2^20` with no divergence flag.
pub const MG_THRESHOLD_LOG2: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MgEstimate {
    pub horizon: u64,
    pub estimate: Interval,
    pub log_estimate: Interval,
    pub attained_at: (u64, u64),
    /// The maximum is attained on the last level `j + k = horizon`.
    pub still_increasing: bool,
    pub divergence_suspected: bool,
}

impl MgEstimate {
    /// Whether this estimate supports `mg < ∞`.
    pub fn is_finite_evidence(&self) -> bool {
        !self.divergence_suspected && self.estimate.hi <= f64::from(1u32 << MG_THRESHOLD_LOG2)
    }
}

/// Flags superlinear growth of a running maximum of logs.
///
/// `running[n]` is the running maximum up to level `n`. With `H` the last
/// level, the rise over `[3H/4, H]` is compared to the rise over
/// `[H/2, 3H/4]`: a convergent `L - c/n` gives a ratio of 1/2, logarithmic
/// growth about 0.71 and linear growth 1. The flag needs a ratio of at
/// least 0.6 and an absolute rise above 0.05.
pub fn divergence_suspected(running: &[f64]) -> bool {
    let h = running.len().saturating_sub(1);
    if h < 4 {
        return false;
    }
    let (q3, q2) = (running[3 * h / 4], running[h / 2]);
    let d1 = running[h] - q3;
    let d0 = q3 - q2;
    d1 > 0.05 && d1 >= 0.6 * d0
}

/// Maximum over `1 ≤ j + k ≤ horizon`, computed in log space.
pub fn mg_estimate(m: &WeightSequence, n: &WeightSequence, horizon: u64) -> Result<MgEstimate, WeightError> {
    if horizon == 0 {
        return Err(WeightError::InvalidSpec("mg horizon must be at least 1".into()));
    }
    let ln_n = (0..=horizon)
        .map(|k| n.ln_big_m(k as u128))
        .collect::<Result<Vec<_>, _>>()?;
    // best per level, chosen by midpoint with the first j winning ties
    let levels = (1..=horizon)
        .into_par_iter()
        .map(|s| {
            let ln_ms = m.ln_big_m(s as u128)?;
            let mut best: Option<(u64, Interval)> = None;
            for j in 0..=s {
                let v = (ln_ms - ln_n[j as usize] - ln_n[(s - j) as usize]).scale(1.0 / s as f64);
                if best.as_ref().is_none_or(|(_, b)| v.mid() > b.mid()) {
                    best = Some((j, v));
                }
            }
            Ok(best.expect("level is nonempty"))
        })
        .collect::<Result<Vec<_>, WeightError>>()?;

    let mut running = vec![f64::NEG_INFINITY];
    let mut best: Option<(u64, u64, Interval)> = None;
    let mut hull: Option<Interval> = None;
    for (i, (j, v)) in levels.iter().enumerate() {
        let s = i as u64 + 1;
        hull = Some(match hull {
            None => *v,
            Some(h) => h.max(v),
        });
        if best.as_ref().is_none_or(|(_, _, b)| v.mid() > b.mid()) {
            best = Some((*j, s - j, *v));
        }
        running.push(best.as_ref().expect("set").2.mid());
    }
    let (j, k, _) = best.expect("horizon ≥ 1");
    let log_estimate = hull.expect("horizon ≥ 1");
    Ok(MgEstimate {
        horizon,
        estimate: log_estimate.exp(),
        log_estimate,
        attained_at: (j, k),
        still_increasing: j + k == horizon,
        divergence_suspected: divergence_suspected(&running),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_small_horizon() {
        let g = WeightSequence::gevrey("1");
        let e = mg_estimate(&g, &g, 2).unwrap();
        assert_eq!(e.attained_at, (1, 1));
        assert!(e.estimate.contains(std::f64::consts::SQRT_2, 0.0));
    }

    #[test]
    fn analytic_approaches_two() {
        let g = WeightSequence::gevrey("1");
        let e = mg_estimate(&g, &g, 256).unwrap();
        assert!(e.estimate.lo >= 1.97 && e.estimate.hi <= 2.0, "{}", e.estimate);
        assert!(!e.divergence_suspected);
        assert!(e.is_finite_evidence());
    }

    #[test]
    fn square_exponential_diverges() {
        let s = WeightSequence::parse("sqexp:2").unwrap();
        let e = mg_estimate(&s, &s, 64).unwrap();
        assert!(e.divergence_suspected);
        assert!(!e.is_finite_evidence());
    }

    #[test]
    fn mismatched_gevrey_diverges_slowly() {
        let e = mg_estimate(&WeightSequence::gevrey("3"), &WeightSequence::gevrey("2"), 256).unwrap();
        assert!(e.divergence_suspected, "{e:?}");
        for s in ["1", "3/2", "2", "3", "4"] {
            let g = WeightSequence::gevrey(s);
            let e = mg_estimate(&g, &g, 256).unwrap();
            assert!(!e.divergence_suspected, "s={s}");
        }
    }

    #[test]
    fn rule_on_model_curves() {
        let conv: Vec<f64> = (0..=200).map(|n| 1.0 - 5.0 / (n as f64 + 1.0)).collect();
        let logg: Vec<f64> = (0..=200).map(|n| (n as f64 + 1.0).ln()).collect();
        assert!(!divergence_suspected(&conv));
        assert!(divergence_suspected(&logg));
    }
}
