//! Checks of the `h`-function inequalities and of the three-lines bound on
//! ellipses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::exact::{factorial, ln_rational, rational_from_f64, rational_pow, Interval, Verdict};
use crate::weight_core::{h_and_gamma, h_log, mg_estimate, MgEstimate, WeightSequence};

use super::ellipse::{sup_norm_ellipse, sup_norm_segment, ComplexPoly};
use super::NumericError;

/// Horizon used for `C = mg(M, N)` unless a caller picks another.
pub const DEFAULT_MG_HORIZON: u64 = 256;

/// Rational bounds `E_LO < e < E_HI`.
fn e_lo() -> BigRational {
    BigRational::new(271_828_182_845u64.into(), 100_000_000_000u64.into())
}

fn e_hi() -> BigRational {
    BigRational::new(271_828_182_846u64.into(), 100_000_000_000u64.into())
}

/// Smallest dyadic rational at or above the upper end of the estimate.
pub fn mg_constant(est: &MgEstimate) -> Result<BigRational, NumericError> {
    rational_from_f64(est.estimate.hi)
        .filter(|c| c.is_positive())
        .ok_or_else(|| NumericError::InvalidInput(format!("mg estimate {} is not finite", est.estimate)))
}

/// `x^{1/b}` for the radicand form used by exact `h` values.
#[derive(Clone, Debug)]
struct Radical {
    radicand: BigRational,
    index: u32,
}

impl Radical {
    fn rational(r: BigRational) -> Self {
        Self { radicand: r, index: 1 }
    }

    fn pow_to(&self, l: u32) -> BigRational {
        rational_pow(&self.radicand, (l / self.index) as u64)
    }
}

/// Sign of `Π lhs - Π rhs` for products of radicals, compared exactly
/// after raising both sides to a common power.
fn compare_products(lhs: &[Radical], rhs: &[Radical]) -> std::cmp::Ordering {
    let l = lhs.iter().chain(rhs).fold(1u32, |acc, r| acc.lcm(&r.index));
    let side = |xs: &[Radical]| xs.iter().fold(BigRational::one(), |acc, r| acc * r.pow_to(l));
    side(lhs).cmp(&side(rhs))
}

fn exact_h(seq: &WeightSequence, t: &BigRational) -> Option<Radical> {
    let r = h_and_gamma(seq, t).ok()?;
    let (radicand, index) = r.h_radicand?;
    Some(Radical { radicand, index })
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub t: String,
    pub j: u32,
    pub log_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub evaluated: usize,
    /// Smallest `ln(rhs) - ln(lhs)` lower bound seen; `+∞` when `lhs = 0`.
    pub worst_log_margin: f64,
    pub worst_at: Option<Witness>,
    pub exact_fallbacks: usize,
    pub violations: Vec<Witness>,
    pub inconclusive: Vec<Witness>,
    pub verdict: Verdict,
}

impl InequalityReport {
    fn new() -> Self {
        Self {
            evaluated: 0,
            worst_log_margin: f64::INFINITY,
            worst_at: None,
            exact_fallbacks: 0,
            violations: Vec::new(),
            inconclusive: Vec::new(),
            verdict: Verdict::Holds,
        }
    }

    fn record(&mut self, t: &BigRational, j: u32, margin: f64, verdict: Verdict) {
        self.evaluated += 1;
        let w = Witness {
            t: t.to_string(),
            j,
            log_margin: margin,
        };
        if margin < self.worst_log_margin || self.worst_at.is_none() {
            self.worst_log_margin = margin;
            self.worst_at = Some(w.clone());
        }
        match verdict {
            Verdict::Violated => self.violations.push(w),
            Verdict::Inconclusive => self.inconclusive.push(w),
            Verdict::Holds => {}
        }
        self.verdict = self.verdict.and(verdict);
    }
}

/// `rhs.lo - lhs.hi` with `ln 0 = -∞` handled: a zero left side always
/// holds, a zero right side against a positive left side never does.
fn log_margin(lhs: Interval, rhs: Interval) -> (f64, Verdict) {
    if lhs.hi == f64::NEG_INFINITY {
        return (f64::INFINITY, Verdict::Holds);
    }
    if rhs.hi == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, Verdict::Violated);
    }
    let m = rhs.lo - lhs.hi;
    if m >= 0.0 {
        (m, Verdict::Holds)
    } else if rhs.hi < lhs.lo {
        (m, Verdict::Violated)
    } else {
        (m, Verdict::Inconclusive)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HLemmaReport {
    pub m: String,
    pub n: String,
    pub mg: MgEstimate,
    /// `C`, the dyadic upper rounding of the horizon estimate.
    pub c: String,
    pub j_max: u32,
    pub t_grid: Vec<String>,
    /// `h_m(t) ≤ C^j n_j t^j h_n(Ct)`.
    pub linear: InequalityReport,
    /// `h_m(t) ≤ h_n((eC/2) t)²`.
    pub quadratic: InequalityReport,
    pub verdict: Verdict,
}

/// Both `h` inequalities on every grid point, `0 ≤ j ≤ j_max`.
pub fn h_lemma_check(
    m: &WeightSequence,
    n: &WeightSequence,
    t_grid: &[BigRational],
    j_max: u32,
    mg_horizon: u64,
) -> Result<HLemmaReport, NumericError> {
    let mg = mg_estimate(m, n, mg_horizon)?;
    let c = mg_constant(&mg)?;
    let ln_c = ln_rational(&c);
    let mut ln_n = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        ln_n.push(n.ln_m(j as u128)?);
    }
    let mut linear = InequalityReport::new();
    let mut quadratic = InequalityReport::new();
    for t in t_grid {
        let lhs = h_log(m, t)?;
        let ln_t = ln_rational(t);
        let ct = &c * t;
        let hn_ct = h_log(n, &ct)?;
        for j in 0..=j_max {
            let jf = j as f64;
            let rhs = ln_c.scale(jf) + ln_n[j as usize] + ln_t.scale(jf) + hn_ct;
            let rhs = if hn_ct.hi == f64::NEG_INFINITY { Interval::neg_infinity() } else { rhs };
            let (margin, mut verdict) = log_margin(lhs, rhs);
            if verdict == Verdict::Inconclusive {
                linear.exact_fallbacks += 1;
                verdict = linear_exact(m, n, t, &c, j).unwrap_or(Verdict::Inconclusive);
            }
            // an exact comparison that holds proves the margin nonnegative
            let margin = if verdict == Verdict::Holds { margin.max(0.0) } else { margin };
            linear.record(t, j, margin, verdict);
        }
        quadratic_at(m, n, t, &c, lhs, &mut quadratic)?;
    }
    let verdict = linear.verdict.and(quadratic.verdict);
    Ok(HLemmaReport {
        m: m.spec(),
        n: n.spec(),
        mg,
        c: c.to_string(),
        j_max,
        t_grid: t_grid.iter().map(ToString::to_string).collect(),
        linear,
        quadratic,
        verdict,
    })
}

fn linear_exact(m: &WeightSequence, n: &WeightSequence, t: &BigRational, c: &BigRational, j: u32) -> Option<Verdict> {
    let lhs = exact_h(m, t)?;
    let hn = exact_h(n, &(c * t))?;
    let n_j = Radical {
        radicand: n.radicand(j as u64).ok()?,
        index: n.index(),
    };
    let scale = rational_pow(&(c * t), j as u64) / BigRational::from_integer(factorial(j as u64));
    let ord = compare_products(&[lhs], &[Radical::rational(scale), n_j, hn]);
    Some(if ord.is_le() { Verdict::Holds } else { Verdict::Violated })
}

fn quadratic_at(
    m: &WeightSequence,
    n: &WeightSequence,
    t: &BigRational,
    c: &BigRational,
    lhs: Interval,
    out: &mut InequalityReport,
) -> Result<(), NumericError> {
    let two = BigRational::from_integer(2.into());
    // h_n is nondecreasing, so the lower constant can only shrink the right side
    let arg_lo = e_lo() * c * t / &two;
    let rhs_lo = h_log(n, &arg_lo)?.scale(2.0);
    let (margin, verdict) = log_margin(lhs, rhs_lo);
    if verdict == Verdict::Holds {
        out.record(t, 0, margin, verdict);
        return Ok(());
    }
    let arg_hi = e_hi() * c * t / &two;
    let rhs_hi = h_log(n, &arg_hi)?.scale(2.0);
    if rhs_hi.hi < lhs.lo {
        out.record(t, 0, margin, Verdict::Violated);
        return Ok(());
    }
    out.exact_fallbacks += 1;
    let exact = match (exact_h(m, t), exact_h(n, &arg_lo)) {
        (Some(l), Some(r)) if compare_products(std::slice::from_ref(&l), &[r.clone(), r.clone()]).is_le() => Verdict::Holds,
        _ => Verdict::Inconclusive,
    };
    let margin = if exact == Verdict::Holds { margin.max(0.0) } else { margin };
    out.record(t, 0, margin, exact);
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ThreeLinesInstance {
    pub g: ComplexPoly,
    pub eps: BigRational,
    pub l: f64,
    pub a1: f64,
    pub a2: BigRational,
    pub m: WeightSequence,
    pub n: WeightSequence,
    /// An upper bound for `mg(M, N)`.
    pub c: BigRational,
}

/// Boundary samples for every ellipse sup in the three-lines check.
pub const THREE_LINES_SAMPLES: usize = 8192;

impl ThreeLinesInstance {
    /// Multiplies `g` by the largest factor that keeps both hypotheses.
    pub fn enforce_hypotheses(mut self) -> Result<Self, NumericError> {
        let eps = self.eps.to_f64().unwrap_or(f64::NAN);
        let outer = sup_norm_ellipse(&self.g, eps, THREE_LINES_SAMPLES);
        let seg = sup_norm_segment(&self.g, THREE_LINES_SAMPLES);
        if outer.hi == 0.0 {
            return Ok(self);
        }
        let hm = h_log(&self.m, &(&self.a2 * &self.eps))?.exp();
        let cap = Interval::point(self.a1) * hm;
        let s = (self.l / outer.hi).min(if seg.hi > 0.0 { cap.lo / seg.hi } else { f64::INFINITY });
        self.g = self.g.scaled(s * (1.0 - 1e-12));
        Ok(self)
    }

    /// A seeded instance with degree ≤ 6 and hypotheses enforced.
    pub fn random<R: Rng>(
        rng: &mut R,
        m: &WeightSequence,
        n: &WeightSequence,
        c: &BigRational,
    ) -> Result<Self, NumericError> {
        let degree = rng.gen_range(0..=6);
        let eps = BigRational::new(1.into(), BigInt::from(1u32 << rng.gen_range(0..=3)));
        let a2 = BigRational::new(BigInt::from(rng.gen_range(1..=8)), 4.into());
        let inst = Self {
            g: ComplexPoly::random(degree, rng),
            eps,
            l: rng.gen_range(0.25..=4.0),
            a1: rng.gen_range(0.25..=4.0),
            a2,
            m: m.clone(),
            n: n.clone(),
            c: c.clone(),
        };
        inst.enforce_hypotheses()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeLinesReport {
    pub m: String,
    pub n: String,
    pub degree: usize,
    pub eps: String,
    pub l: f64,
    pub a1: f64,
    pub a2: String,
    pub c: String,
    pub outer_sup: Interval,
    pub segment_sup: Interval,
    pub segment_cap: Interval,
    pub hypotheses_ok: bool,
    pub a3: f64,
    /// Rational lower bound for `a_4 = eCa_2`.
    pub a4_lower: String,
    pub inner_sup: Option<Interval>,
    pub bound: Option<Interval>,
    /// `bound.lo - inner_sup.hi`.
    pub conclusion_margin: Option<f64>,
    pub verdict: Verdict,
}

/// Verifies the hypotheses, then `‖g‖_{Ω_{ε/2}} ≤ a_3 h_n(a_4 ε)`.
pub fn three_lines_check(inst: &ThreeLinesInstance) -> Result<ThreeLinesReport, NumericError> {
    let eps = inst.eps.to_f64().unwrap_or(f64::NAN);
    if !(eps > 0.0) || !(inst.l > 0.0) || !(inst.a1 > 0.0) || !inst.a2.is_positive() {
        return Err(NumericError::InvalidInput("ε, L, a₁, a₂ must be positive".into()));
    }
    let outer = sup_norm_ellipse(&inst.g, eps, THREE_LINES_SAMPLES);
    let segment = sup_norm_segment(&inst.g, THREE_LINES_SAMPLES);
    let hm = h_log(&inst.m, &(&inst.a2 * &inst.eps))?.exp();
    let cap = Interval::point(inst.a1) * hm;
    // a hypothesis fails only when the violation exceeds the enclosure width
    let hypotheses_ok = outer.lo <= inst.l && segment.lo <= cap.hi;
    let a3 = inst.a1.max(inst.l);
    let a4 = e_lo() * &inst.c * &inst.a2;
    let mut report = ThreeLinesReport {
        m: inst.m.spec(),
        n: inst.n.spec(),
        degree: inst.g.degree(),
        eps: inst.eps.to_string(),
        l: inst.l,
        a1: inst.a1,
        a2: inst.a2.to_string(),
        c: inst.c.to_string(),
        outer_sup: outer,
        segment_sup: segment,
        segment_cap: cap,
        hypotheses_ok,
        a3,
        a4_lower: a4.to_string(),
        inner_sup: None,
        bound: None,
        conclusion_margin: None,
        verdict: Verdict::Inconclusive,
    };
    if !hypotheses_ok {
        return Ok(report);
    }
    let inner = sup_norm_ellipse(&inst.g, eps / 2.0, THREE_LINES_SAMPLES);
    let bound = Interval::point(a3) * h_log(&inst.n, &(a4 * &inst.eps))?.exp();
    let margin = bound.lo - inner.hi;
    report.verdict = if margin >= 0.0 {
        Verdict::Holds
    } else if bound.hi < inner.lo {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    report.inner_sup = Some(inner);
    report.bound = Some(bound);
    report.conclusion_margin = Some(margin);
    Ok(report)
}
