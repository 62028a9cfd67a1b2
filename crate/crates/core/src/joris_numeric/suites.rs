//! Named property suites, each a seeded sweep that ends in one verdict.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::exact::Verdict;
use crate::weight_core::{default_t_grid, mg_estimate, WeightSequence};

use super::cauchy::{cauchy_transform, cauchy_values, sample_grid, BoxDomain, DiskIndicator, DEFAULT_CAUCHY_ORDER};
use super::lemmas::{h_lemma_check, mg_constant, three_lines_check, ThreeLinesInstance, DEFAULT_MG_HORIZON};
use super::polarization::{polarization_check, MultiPoly};
use super::seminorm::joris_demo;
use super::test_function::TestFunction1D;
use super::NumericError;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the suite's default case count.
    pub cases: Option<usize>,
    /// Overrides the suite's default quadrature or truncation order.
    pub order: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cases: None,
            order: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub verdict: Verdict,
    pub cases: usize,
    pub summary: String,
    pub details: Value,
}

pub trait PropertySuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError>;
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Margins of the two-sided polarization inequality on random polynomials,
/// plus the rank-one equality cases.
pub struct PolarizationSuite;

/// Tolerance on both polarization margins.
pub const POLARIZATION_TOL: f64 = 1e-6;

impl PropertySuite for PolarizationSuite {
    fn name(&self) -> &'static str {
        "polarization"
    }

    fn description(&self) -> &'static str {
        "directional sup versus multilinear norm on random polynomials, d ≤ 3, k ≤ 5"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.cases.unwrap_or(200);
        let mut worst_lower = f64::INFINITY;
        let mut worst_upper = f64::INFINITY;
        let mut failures = Vec::new();
        for i in 0..n {
            let d = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=5);
            let degree = rng.gen_range(k..=5);
            let f = MultiPoly::random(d, degree, &mut rng);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let r = polarization_check(&f, &x, k, 64)?;
            worst_lower = worst_lower.min(r.lower);
            worst_upper = worst_upper.min(r.upper);
            if r.lower < -POLARIZATION_TOL || r.upper < -POLARIZATION_TOL {
                failures.push(json!({"case": i, "d": d, "k": k, "margins": to_value(&r)}));
            }
        }
        let mut rank_one = Vec::new();
        for k in 1..=5 {
            for d in 1..=3 {
                let r = polarization_check(&MultiPoly::coordinate_power(d, 0, k), &vec![0.5; d], k, 64)?;
                rank_one.push(json!({"d": d, "k": k, "lower": r.lower}));
                if r.lower != 0.0 {
                    failures.push(json!({"rank_one": {"d": d, "k": k}, "lower": r.lower}));
                }
            }
        }
        let verdict = if failures.is_empty() { Verdict::Holds } else { Verdict::Violated };
        Ok(SuiteOutcome {
            suite: self.name().into(),
            verdict,
            cases: n + rank_one.len(),
            summary: format!("worst margins lower {worst_lower:.3e}, upper {worst_upper:.3e}"),
            details: json!({
                "tolerance": POLARIZATION_TOL,
                "worst_lower": worst_lower,
                "worst_upper": worst_upper,
                "rank_one": rank_one,
                "failures": failures,
            }),
        })
    }
}

/// Both `h` inequalities for Gevrey pairs `1 ≤ s ≤ s' ≤ 4`.
pub struct HLemmaSuite;

pub const GEVREY_INDICES: [&str; 7] = ["1", "3/2", "2", "5/2", "3", "7/2", "4"];

impl PropertySuite for HLemmaSuite {
    fn name(&self) -> &'static str {
        "h-lemma"
    }

    fn description(&self) -> &'static str {
        "h_m(t) ≤ C^j n_j t^j h_n(Ct) and h_m(t) ≤ h_n((eC/2)t)² for Gevrey pairs, j ≤ 20"
    }

    fn run(&self, _cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError> {
        let grid = default_t_grid();
        let mut pairs = Vec::new();
        for (i, s) in GEVREY_INDICES.iter().enumerate() {
            for s2 in &GEVREY_INDICES[i..] {
                pairs.push((*s, *s2));
            }
        }
        let reports: Vec<_> = {
            use rayon::prelude::*;
            pairs
                .par_iter()
                .map(|(s, s2)| {
                    h_lemma_check(&WeightSequence::gevrey(s), &WeightSequence::gevrey(s2), &grid, 20, DEFAULT_MG_HORIZON)
                })
                .collect::<Result<_, _>>()?
        };
        let verdict = Verdict::all(reports.iter().map(|r| r.verdict));
        let violations: usize = reports.iter().map(|r| r.linear.violations.len() + r.quadratic.violations.len()).sum();
        let worst = reports
            .iter()
            .map(|r| r.linear.worst_log_margin.min(r.quadratic.worst_log_margin))
            .fold(f64::INFINITY, f64::min);
        let rows: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "m": r.m, "n": r.n, "c": r.c, "mg": to_value(&r.mg),
                    "linear": {"verdict": r.linear.verdict, "worst_log_margin": r.linear.worst_log_margin,
                               "worst_at": to_value(&r.linear.worst_at), "violations": to_value(&r.linear.violations),
                               "inconclusive": r.linear.inconclusive.len(), "exact_fallbacks": r.linear.exact_fallbacks},
                    "quadratic": {"verdict": r.quadratic.verdict, "worst_log_margin": r.quadratic.worst_log_margin,
                                  "worst_at": to_value(&r.quadratic.worst_at), "violations": to_value(&r.quadratic.violations),
                                  "inconclusive": r.quadratic.inconclusive.len(), "exact_fallbacks": r.quadratic.exact_fallbacks},
                })
            })
            .collect();
        Ok(SuiteOutcome {
            suite: self.name().into(),
            verdict,
            cases: reports.iter().map(|r| r.linear.evaluated + r.quadratic.evaluated).sum(),
            summary: format!("{} pairs, {violations} violations, worst log margin {worst:.3e}", reports.len()),
            details: json!({
                "t_grid": format!("2^-i, 0 ≤ i ≤ {}", grid.len() - 1),
                "j_max": 20,
                "mg_horizon": DEFAULT_MG_HORIZON,
                "pairs": rows,
            }),
        })
    }
}

/// Seeded random three-lines instances with the hypotheses enforced.
pub struct ThreeLinesSuite;

pub const THREE_LINES_TOL: f64 = 1e-9;

impl PropertySuite for ThreeLinesSuite {
    fn name(&self) -> &'static str {
        "three-lines"
    }

    fn description(&self) -> &'static str {
        "‖g‖ on Ω_{ε/2} ≤ max(a₁, L) h_n(eCa₂ε) for random polynomials scaled to the hypotheses"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.cases.unwrap_or(50);
        let mut constants: BTreeMap<(usize, usize), _> = BTreeMap::new();
        let mut worst = f64::INFINITY;
        let mut rows = Vec::new();
        let mut verdict = Verdict::Holds;
        for _ in 0..n {
            let i = rng.gen_range(0..GEVREY_INDICES.len());
            let j = rng.gen_range(i..GEVREY_INDICES.len());
            let (m, nn) = (WeightSequence::gevrey(GEVREY_INDICES[i]), WeightSequence::gevrey(GEVREY_INDICES[j]));
            let c = match constants.get(&(i, j)) {
                Some(c) => Clone::clone(c),
                None => {
                    let c = mg_constant(&mg_estimate(&m, &nn, DEFAULT_MG_HORIZON)?)?;
                    constants.insert((i, j), c.clone());
                    c
                }
            };
            let inst = ThreeLinesInstance::random(&mut rng, &m, &nn, &c)?;
            let r = three_lines_check(&inst)?;
            let case = match (r.hypotheses_ok, r.conclusion_margin) {
                (true, Some(margin)) if margin >= -THREE_LINES_TOL => Verdict::Holds,
                (true, Some(_)) => r.verdict.and(Verdict::Inconclusive),
                _ => Verdict::Inconclusive,
            };
            worst = worst.min(r.conclusion_margin.unwrap_or(f64::NEG_INFINITY));
            verdict = verdict.and(case);
            rows.push(to_value(&r));
        }
        Ok(SuiteOutcome {
            suite: self.name().into(),
            verdict,
            cases: n,
            summary: format!("{n} instances, worst conclusion margin {worst:.3e}"),
            details: json!({"tolerance": THREE_LINES_TOL, "worst_margin": worst, "instances": rows}),
        })
    }
}

/// The disk indicator: interior values against `z̄`, residual under order
/// doubling, and the sup ratio across radii.
pub struct CauchySuite;

pub const CAUCHY_INTERIOR_TOL: f64 = 1e-3;

impl PropertySuite for CauchySuite {
    fn name(&self) -> &'static str {
        "cauchy"
    }

    fn description(&self) -> &'static str {
        "Cauchy transform of disk indicators: interior values, ∂̄ residual under refinement, sup bound"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError> {
        let order = cfg.order.unwrap_or(DEFAULT_CAUCHY_ORDER);
        let domain = BoxDomain::square(1.0);
        let disk = DiskIndicator::new(Complex64::new(0.0, 0.0), 0.75);
        let pts: Vec<Complex64> = sample_grid(&domain, 16).into_iter().filter(|z| z.norm() < 0.7).collect();
        let v = cauchy_values(&disk, &domain, order, &pts)?;
        let interior_err = pts.iter().zip(&v).map(|(z, v)| (v - z.conj()).norm()).fold(0.0, f64::max);

        let coarse = cauchy_transform(&disk, &domain, order, 8)?;
        let fine = cauchy_transform(&disk, &domain, 2 * order, 8)?;
        let ratio = if coarse.residual.max > 0.0 { fine.residual.max / coarse.residual.max } else { 0.0 };

        let mut sweep = Vec::new();
        for r in [0.25, 0.5, 1.0] {
            let d = DiskIndicator::new(Complex64::new(0.0, 0.0), r);
            let rep = cauchy_transform(&d, &BoxDomain::square(1.5), order, 12)?;
            sweep.push(json!({"r": r, "sup_v": rep.sup_v, "sup_w": rep.sup_w, "c_box": rep.c_box}));
        }
        let c_box = sweep.iter().filter_map(|s| s["c_box"].as_f64()).fold(0.0, f64::max);

        let ok = interior_err <= CAUCHY_INTERIOR_TOL && ratio <= 0.5;
        Ok(SuiteOutcome {
            suite: self.name().into(),
            verdict: if ok { Verdict::Holds } else { Verdict::Violated },
            cases: pts.len() + coarse.residual.points + sweep.len(),
            summary: format!(
                "order {order}: interior error {interior_err:.2e}, residual ratio {ratio:.3e}, C_box {c_box:.4}"
            ),
            details: json!({
                "order": order,
                "interior_max_error": interior_err,
                "interior_tolerance": CAUCHY_INTERIOR_TOL,
                "residual": {"order_p": coarse.residual, "order_2p": fine.residual, "ratio": ratio},
                "sup_sweep": sweep,
                "c_box": c_box,
            }),
        })
    }
}

/// `f = |t|`, `j = 2`: the square is smooth, the cube is not.
pub struct JorisDemoSuite;

impl PropertySuite for JorisDemoSuite {
    fn name(&self) -> &'static str {
        "joris-demo"
    }

    fn description(&self) -> &'static str {
        "seminorms of f², f³, f for f = |t|, with divided differences at the kink"
    }

    fn run(&self, _cfg: &SuiteConfig) -> Result<SuiteOutcome, NumericError> {
        let f = TestFunction1D::parse("abs:1")?;
        let r = joris_demo(&f, 2, &WeightSequence::gevrey("1"), 1.0, 10)?;
        let square_finite = r.entries[0].seminorm.value.hi.is_finite() && r.entries[0].seminorm.gaps.is_empty();
        let order4 = r.entries[1].divided_differences.iter().find(|row| row.order == 4).cloned();
        let cube_blows_up = order4.as_ref().is_some_and(|row| row.growth.iter().all(|g| *g >= 10.0));
        let verdict = if square_finite && cube_blows_up { Verdict::Holds } else { Verdict::Violated };
        Ok(SuiteOutcome {
            suite: self.name().into(),
            verdict,
            cases: r.entries.len(),
            summary: format!(
                "f² seminorm {}, f³ order-4 growth {:?}",
                r.entries[0].seminorm.value,
                order4.as_ref().map(|row| row.growth.clone()).unwrap_or_default()
            ),
            details: to_value(&r),
        })
    }
}

/// Suites by name, in registration order.
#[derive(Clone)]
pub struct SuiteRegistry {
    suites: Vec<Arc<dyn PropertySuite>>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self { suites: Vec::new() };
        r.register(Arc::new(PolarizationSuite));
        r.register(Arc::new(HLemmaSuite));
        r.register(Arc::new(ThreeLinesSuite));
        r.register(Arc::new(CauchySuite));
        r.register(Arc::new(JorisDemoSuite));
        r
    }
}

impl SuiteRegistry {
    pub fn register(&mut self, suite: Arc<dyn PropertySuite>) {
        self.suites.retain(|s| s.name() != suite.name());
        self.suites.push(suite);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn PropertySuite>> {
        self.suites.iter().find(|s| s.name() == name).cloned()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn all(&self) -> &[Arc<dyn PropertySuite>] {
        &self.suites
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_suites() {
        let r = SuiteRegistry::default();
        assert_eq!(r.names(), ["polarization", "h-lemma", "three-lines", "cauchy", "joris-demo"]);
        assert!(r.get("nope").is_none());
    }

    #[test]
    fn demo_suite_holds() {
        let out = JorisDemoSuite.run(&SuiteConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Holds, "{}", out.summary);
    }
}
