//! R-/B-admissibility of weight matrices and the regularity flags
//! (stability under derivation, almost increasing, quotient control).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{ln_factorial, Interval, Verdict};

use super::gamma::{counting_functions, default_t_grid};
use super::mg::{divergence_suspected, mg_estimate, MgEstimate, MG_THRESHOLD_LOG2};
use super::sequence::{WeightMatrix, WeightSequence};
use super::WeightError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    R,
    B,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "R" | "r" => Ok(Mode::R),
            "B" | "b" => Ok(Mode::B),
            other => Err(format!("mode must be R or B, got `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::R => "R",
            Mode::B => "B",
        })
    }
}

/// A counting value; `None` stands for `+∞` (no finite index exists).
pub type Count = Option<u128>;

fn count_le(a: Count, b: Count) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

fn counts(seq: &WeightSequence, t: &BigRational) -> Result<(Count, Count), WeightError> {
    match counting_functions(seq, t) {
        Ok((u, l)) => Ok((Some(u), Some(l))),
        Err(WeightError::NoFiniteMinimizer { .. }) => Ok((None, None)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountPair {
    /// `Γ̄` at `C·t` of the dominated side.
    pub upper_at_ct: Count,
    /// `Γ̲` at `t` of the dominating side.
    pub lower_at_t: Count,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaFailure {
    pub t: String,
    pub values: CountPair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaDomination {
    pub mode: Mode,
    pub c: String,
    pub holds: bool,
    pub points_checked: usize,
    pub failure: Option<GammaFailure>,
}

/// R: `Γ̄_n(Ct) ≤ Γ̲_m(t)`; B: `Γ̄_m(Ct) ≤ Γ̲_n(t)`, at every grid point.
pub fn check_gamma_domination(
    m: &WeightSequence,
    n: &WeightSequence,
    c: &BigRational,
    t_grid: &[BigRational],
    mode: Mode,
) -> Result<GammaDomination, WeightError> {
    if *c < BigRational::from_integer(1.into()) {
        return Err(WeightError::InvalidSpec(format!("C must be ≥ 1, got {c}")));
    }
    let (upper_side, lower_side) = match mode {
        Mode::R => (n, m),
        Mode::B => (m, n),
    };
    let results = t_grid
        .par_iter()
        .map(|t| {
            let (up, _) = counts(upper_side, &(c * t))?;
            let (_, lo) = counts(lower_side, t)?;
            Ok(CountPair {
                upper_at_ct: up,
                lower_at_t: lo,
            })
        })
        .collect::<Result<Vec<_>, WeightError>>()?;
    let failure = t_grid
        .iter()
        .zip(results)
        .find(|(_, v)| !count_le(v.upper_at_ct, v.lower_at_t))
        .map(|(t, values)| GammaFailure {
            t: t.to_string(),
            values,
        });
    Ok(GammaDomination {
        mode,
        c: c.to_string(),
        holds: failure.is_none(),
        points_checked: t_grid.len(),
        failure,
    })
}

#[derive(Clone, Debug)]
pub struct AdmissibilityConfig {
    pub mg_horizon: u64,
    pub t_grid: Vec<BigRational>,
    pub c_exponent_max: u32,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self {
            mg_horizon: 256,
            t_grid: default_t_grid(),
            c_exponent_max: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attempt {
    pub n: String,
    /// Smallest `C` on the grid for which the Γ clause held.
    pub c: Option<String>,
    /// The failure at the largest `C` tried, when none held.
    pub gamma_failure: Option<GammaFailure>,
    pub mg: Option<MgEstimate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    CertifiedTrueAtHorizon,
    Falsified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceVerdict {
    pub m: String,
    pub verdict: Overall,
    pub witness_n: Option<String>,
    pub witness_c: Option<String>,
    /// Every `(N, C)` pair tried with its failing values, for falsified entries.
    pub failures: Vec<(String, String, GammaFailure)>,
    pub attempts: Vec<Attempt>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub mode: Mode,
    pub mg_horizon: u64,
    pub mg_threshold: String,
    pub c_grid: String,
    pub t_grid: Vec<String>,
    pub note: String,
    pub sequences: Vec<SequenceVerdict>,
    pub overall: Overall,
}

fn dyadic(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(1) << e)
}

fn one_sequence(
    matrix: &WeightMatrix,
    mi: usize,
    mode: Mode,
    cfg: &AdmissibilityConfig,
) -> Result<SequenceVerdict, WeightError> {
    let m = &matrix.sequences[mi];
    let order = std::iter::once(mi).chain((0..matrix.sequences.len()).filter(|&i| i != mi));
    let mut attempts = Vec::new();
    let mut failures = Vec::new();
    let mut gamma_ok_somewhere = false;
    for ni in order {
        let n = &matrix.sequences[ni];
        let mut found = None;
        let mut last_failure = None;
        for e in 0..=cfg.c_exponent_max {
            let c = dyadic(e);
            let dom = check_gamma_domination(m, n, &c, &cfg.t_grid, mode)?;
            match dom.failure {
                None => {
                    found = Some(c);
                    break;
                }
                Some(f) => {
                    failures.push((n.spec(), c.to_string(), f.clone()));
                    last_failure = Some(f);
                }
            }
        }
        let Some(c) = found else {
            attempts.push(Attempt {
                n: n.spec(),
                c: None,
                gamma_failure: last_failure,
                mg: None,
            });
            continue;
        };
        gamma_ok_somewhere = true;
        let mg = match mode {
            Mode::R => mg_estimate(m, n, cfg.mg_horizon)?,
            Mode::B => mg_estimate(n, m, cfg.mg_horizon)?,
        };
        let ok = mg.is_finite_evidence();
        attempts.push(Attempt {
            n: n.spec(),
            c: Some(c.to_string()),
            gamma_failure: None,
            mg: Some(mg),
        });
        if ok {
            return Ok(SequenceVerdict {
                m: m.spec(),
                verdict: Overall::CertifiedTrueAtHorizon,
                witness_n: Some(n.spec()),
                witness_c: Some(c.to_string()),
                failures: Vec::new(),
                attempts,
            });
        }
    }
    let verdict = if gamma_ok_somewhere {
        Overall::Inconclusive
    } else {
        Overall::Falsified
    };
    if verdict != Overall::Falsified {
        failures.clear();
    }
    Ok(SequenceVerdict {
        m: m.spec(),
        verdict,
        witness_n: None,
        witness_c: None,
        failures,
        attempts,
    })
}

/// Checks both clauses for every `M`, searching `N` (starting with `M`
/// itself, then in matrix order) and `C ∈ {2^0, …, 2^c_exponent_max}`.
pub fn check_admissible(
    matrix: &WeightMatrix,
    mode: Mode,
    cfg: &AdmissibilityConfig,
) -> Result<AdmissibilityReport, WeightError> {
    if cfg.t_grid.is_empty() {
        return Err(WeightError::InvalidSpec("t grid is empty".into()));
    }
    let sequences = (0..matrix.sequences.len())
        .map(|i| one_sequence(matrix, i, mode, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let overall = if sequences.iter().all(|s| s.verdict == Overall::CertifiedTrueAtHorizon) {
        Overall::CertifiedTrueAtHorizon
    } else if sequences.iter().any(|s| s.verdict == Overall::Falsified) {
        Overall::Falsified
    } else {
        Overall::Inconclusive
    };
    Ok(AdmissibilityReport {
        mode,
        mg_horizon: cfg.mg_horizon,
        mg_threshold: format!("2^{MG_THRESHOLD_LOG2}"),
        c_grid: format!("2^0..2^{}", cfg.c_exponent_max),
        t_grid: cfg.t_grid.iter().map(ToString::to_string).collect(),
        note: format!(
            "t ranges over the listed grid only; mg evaluated for j + k ≤ {}",
            cfg.mg_horizon
        ),
        sequences,
        overall,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityFlag {
    pub verdict: Verdict,
    /// Per `M`: the witness `N` and the achieved sup (as a log enclosure).
    pub witnesses: Vec<RegularityWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityWitness {
    pub m: String,
    pub n: Option<String>,
    pub sup: Interval,
    pub attained_at: Vec<u64>,
    pub divergence_suspected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub mode: Mode,
    pub horizon: u64,
    pub dc: RegularityFlag,
    pub almost_increasing: RegularityFlag,
    pub qr: RegularityFlag,
}

/// Log values on levels `1..=horizon` with their argmax, reduced to a
/// running maximum.
struct SupTrace {
    best: Interval,
    at: Vec<u64>,
    running: Vec<f64>,
}

impl SupTrace {
    fn new() -> Self {
        Self {
            best: Interval::neg_infinity(),
            at: Vec::new(),
            running: vec![f64::NEG_INFINITY],
        }
    }

    fn push(&mut self, v: Interval, at: Vec<u64>) {
        if self.at.is_empty() || v.mid() > self.best.mid() {
            self.at = at;
        }
        self.best = if self.running.len() == 1 { v } else { self.best.max(&v) };
        self.running.push(self.best.mid());
    }

    fn bounded(&self) -> bool {
        !divergence_suspected(&self.running) && self.best.hi <= f64::from(MG_THRESHOLD_LOG2) * std::f64::consts::LN_2
    }
}

/// `sup_{k≥1} (M_{k+1}/N_k)^{1/k}`.
fn dc_sup(m: &WeightSequence, n: &WeightSequence, h: u64) -> Result<SupTrace, WeightError> {
    let mut tr = SupTrace::new();
    for k in 1..=h {
        let v = (m.ln_big_m(k as u128 + 1)? - n.ln_big_m(k as u128)?).scale(1.0 / k as f64);
        tr.push(v, vec![k]);
    }
    Ok(tr)
}

fn ln_root_m(s: &WeightSequence, k: u64) -> Result<Interval, WeightError> {
    Ok(s.ln_m(k as u128)?.scale(1.0 / k as f64))
}

/// `sup_{1≤j≤k} m_j^{1/j} / n_k^{1/k}`.
fn almost_increasing_sup(m: &WeightSequence, n: &WeightSequence, h: u64) -> Result<SupTrace, WeightError> {
    let mut tr = SupTrace::new();
    let mut prefix: Option<(u64, Interval)> = None;
    for k in 1..=h {
        let v = ln_root_m(m, k)?;
        prefix = Some(match prefix {
            Some((j, p)) if p.mid() >= v.mid() => (j, p.max(&v)),
            Some((_, p)) => (k, p.max(&v)),
            None => (k, v),
        });
        let (j, p) = prefix.expect("set");
        tr.push(p - ln_root_m(n, k)?, vec![j, k]);
    }
    Ok(tr)
}

/// `sup_{k≥1} (m_k/m_{k-1}) n_k^{-1/k}`.
fn qr_sup(m: &WeightSequence, n: &WeightSequence, h: u64) -> Result<SupTrace, WeightError> {
    let mut tr = SupTrace::new();
    for k in 1..=h {
        let ratio = m.ln_big_m(k as u128)? - m.ln_big_m(k as u128 - 1)? - ln_factorial(k as u128)
            + ln_factorial(k as u128 - 1);
        tr.push(ratio - ln_root_m(n, k)?, vec![k]);
    }
    Ok(tr)
}

type SupFn = fn(&WeightSequence, &WeightSequence, u64) -> Result<SupTrace, WeightError>;

fn flag(matrix: &WeightMatrix, mode: Mode, horizon: u64, f: SupFn) -> Result<RegularityFlag, WeightError> {
    let seqs = &matrix.sequences;
    let mut witnesses = Vec::new();
    for (mi, m) in seqs.iter().enumerate() {
        let order = std::iter::once(mi).chain((0..seqs.len()).filter(|&i| i != mi));
        let mut first: Option<RegularityWitness> = None;
        let mut found = None;
        for ni in order {
            let n = &seqs[ni];
            let tr = match mode {
                Mode::R => f(m, n, horizon)?,
                Mode::B => f(n, m, horizon)?,
            };
            let w = RegularityWitness {
                m: m.spec(),
                n: Some(n.spec()),
                sup: tr.best.exp(),
                attained_at: tr.at.clone(),
                divergence_suspected: divergence_suspected(&tr.running),
            };
            if tr.bounded() {
                found = Some(w);
                break;
            }
            first.get_or_insert(w);
        }
        witnesses.push(found.unwrap_or_else(|| {
            let mut w = first.expect("matrix is nonempty");
            w.n = None;
            w
        }));
    }
    let verdict = if witnesses.iter().all(|w| w.n.is_some()) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(RegularityFlag { verdict, witnesses })
}

/// Finite-horizon evaluation of the three sup conditions with an `∃N`
/// search. R forms take `(M, N)`, B forms swap the roles.
pub fn check_regularity_conditions(
    matrix: &WeightMatrix,
    mode: Mode,
    horizon: u64,
) -> Result<RegularityReport, WeightError> {
    if horizon == 0 {
        return Err(WeightError::InvalidSpec("horizon must be at least 1".into()));
    }
    Ok(RegularityReport {
        mode,
        horizon,
        dc: flag(matrix, mode, horizon, dc_sup)?,
        almost_increasing: flag(matrix, mode, horizon, almost_increasing_sup)?,
        qr: flag(matrix, mode, horizon, qr_sup)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn g(s: &str) -> WeightSequence {
        WeightSequence::gevrey(s)
    }

    #[test]
    fn domination_examples() {
        let grid = [q(1, 100)];
        let r = check_gamma_domination(&g("2"), &g("3"), &q(1, 1), &grid, Mode::R).unwrap();
        assert!(r.holds);
        let r = check_gamma_domination(&g("3"), &g("2"), &q(1, 1), &grid, Mode::R).unwrap();
        let f = r.failure.unwrap();
        assert_eq!(f.t, "1/100");
        assert_eq!((f.values.upper_at_ct, f.values.lower_at_t), (Some(99), Some(9)));
    }

    #[test]
    fn self_domination_for_log_convex() {
        for s in ["3/2", "2", "3"] {
            for c in [1, 2, 8] {
                let r = check_gamma_domination(&g(s), &g(s), &q(c, 1), &default_t_grid(), Mode::R).unwrap();
                assert!(r.holds, "s={s} C={c}");
            }
        }
    }

    #[test]
    fn singleton_gevrey_is_r_admissible() {
        let m = WeightMatrix::singleton(g("2"));
        let r = check_admissible(&m, Mode::R, &AdmissibilityConfig::default()).unwrap();
        assert_eq!(r.overall, Overall::CertifiedTrueAtHorizon);
        assert_eq!(r.sequences[0].witness_c.as_deref(), Some("1"));
    }

    #[test]
    fn square_exponential_is_not_certified() {
        let m = WeightMatrix::singleton(WeightSequence::parse("sqexp:2").unwrap());
        let cfg = AdmissibilityConfig {
            mg_horizon: 64,
            ..Default::default()
        };
        let r = check_admissible(&m, Mode::R, &cfg).unwrap();
        assert_ne!(r.overall, Overall::CertifiedTrueAtHorizon);
        let mg = r.sequences[0].attempts[0].mg.as_ref().unwrap();
        assert!(mg.divergence_suspected);
    }

    #[test]
    fn gevrey_regularity() {
        let m = WeightMatrix::singleton(g("2"));
        let r = check_regularity_conditions(&m, Mode::R, 200).unwrap();
        assert_eq!(r.dc.verdict, Verdict::Holds);
        assert!(r.dc.witnesses[0].sup.hi <= 4.0 + 1e-9 && r.dc.witnesses[0].sup.contains(4.0, 1e-9));
        assert_eq!(r.almost_increasing.verdict, Verdict::Holds);
        assert!(r.almost_increasing.witnesses[0].sup.contains(1.0, 1e-9));
        assert_eq!(r.qr.verdict, Verdict::Holds);
        assert!(r.qr.witnesses[0].sup.hi <= 3.0);
    }
}
