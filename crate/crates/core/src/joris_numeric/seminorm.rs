//! Grid estimates of `sup_{x∈K, k} |f^{(k)}(x)| / (ρ^k M_k)` and the
//! consecutive-powers demonstration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::exact::{rational_from_f64, Interval};
use crate::weight_core::WeightSequence;

use super::test_function::{Smoothness, TestFunction1D};
use super::NumericError;

/// Relative slack put around float derivative values.
const EVAL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct DividedDifference {
    pub order: u32,
    pub at: f64,
    pub mesh: f64,
    pub value: f64,
    /// Richardson-extrapolated value from meshes `h` and `h/2`.
    pub extrapolated: f64,
    /// `|D_h − D_{h/2}|`, the observed noise floor.
    pub noise: f64,
    pub exact: bool,
}

/// Centered `k`-th divided difference `h^{-k} Σ (-1)^i C(k,i) f(x + (k/2 - i)h)`.
fn centered(f: &TestFunction1D, k: u32, x: f64, h: f64) -> (f64, bool) {
    if let (Some(xq), Some(hq)) = (rational_from_f64(x), rational_from_f64(h)) {
        let half = BigRational::new(k.into(), 2.into());
        let mut sum = BigRational::zero();
        let mut exact = true;
        let mut binom = BigInt::from(1);
        for i in 0..=k {
            let off = (&half - BigRational::from_integer(i.into())) * &hq;
            match f.eval_exact(&(&xq + off)) {
                Some(v) => {
                    let term = v * BigRational::from_integer(binom.clone());
                    sum = if i % 2 == 0 { sum + term } else { sum - term };
                }
                None => {
                    exact = false;
                    break;
                }
            }
            binom = binom * (k - i) / (i + 1);
        }
        if exact {
            let v = sum / num_traits::pow(hq, k as usize);
            return (v.to_f64().unwrap_or(f64::NAN), true);
        }
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for i in 0..=k {
        let v = f.eval(x + (k as f64 / 2.0 - i as f64) * h);
        sum += if i % 2 == 0 { binom * v } else { -binom * v };
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    (sum / h.powi(k as i32), false)
}

pub fn divided_difference(f: &TestFunction1D, k: u32, x: f64, h: f64) -> DividedDifference {
    let (d1, e1) = centered(f, k, x, h);
    let (d2, e2) = centered(f, k, x, h / 2.0);
    DividedDifference {
        order: k,
        at: x,
        mesh: h,
        value: d1,
        extrapolated: (4.0 * d2 - d1) / 3.0,
        noise: (d1 - d2).abs(),
        exact: e1 && e2,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Gap {
    pub order: u32,
    pub at: f64,
    pub fallback: DividedDifference,
    /// The fallback is unreliable (noise above 10⁻³ relative).
    pub noisy: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormEstimate {
    pub value: Interval,
    pub k_max: u32,
    pub arg_k: u32,
    pub arg_x: f64,
    pub grid: Vec<f64>,
    pub gaps: Vec<Gap>,
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

/// `max` over grid points of `K` and `k ≤ k_max`. Points where a
/// derivative does not exist are skipped and reported as gaps.
pub fn seminorm(
    f: &TestFunction1D,
    k_interval: (f64, f64),
    m: &WeightSequence,
    rho: f64,
    k_max: u32,
    grid_points: usize,
) -> Result<SeminormEstimate, NumericError> {
    let (a, b) = k_interval;
    if !(a <= b) || !(rho > 0.0) {
        return Err(NumericError::InvalidInput("need a ≤ b and ρ > 0".into()));
    }
    let mut grid = uniform_grid(a, b, grid_points);
    for s in f.singular_points() {
        if a <= s && s <= b && !grid.contains(&s) {
            grid.push(s);
        }
    }
    grid.sort_by(f64::total_cmp);
    let ln_rho = Interval::point_ln(rho);
    let ln_rho = if ln_rho.lo.is_finite() { ln_rho } else { rho.ln().into_interval() };

    let mut best: Option<(Interval, u32, f64)> = None;
    let mut gaps = Vec::new();
    for k in 0..=k_max {
        let ln_mk = m.ln_big_m(k as u128)?;
        for &x in &grid {
            let d = match f.derivative(k, x) {
                Ok(d) => d,
                Err(NumericError::DerivativeUnavailable { .. }) => {
                    let fallback = divided_difference(f, k, x, 1e-3);
                    let noisy = fallback.noise > 1e-3 * fallback.value.abs().max(1e-300);
                    gaps.push(Gap {
                        order: k,
                        at: x,
                        fallback,
                        noisy,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            if d == 0.0 {
                continue;
            }
            let ln_d = d.abs().ln();
            let ln_d = Interval::new(ln_d - EVAL_SLACK, ln_d + EVAL_SLACK);
            let v = ln_d - ln_rho.scale(k as f64) - ln_mk;
            if best.as_ref().is_none_or(|(b, _, _)| v.mid() > b.mid()) {
                best = Some((v, k, x));
            }
        }
    }
    let (value, arg_k, arg_x) = match best {
        Some((v, k, x)) => (v.exp(), k, x),
        None => (Interval::zero(), 0, a),
    };
    Ok(SeminormEstimate {
        value,
        k_max,
        arg_k,
        arg_x,
        grid,
        gaps,
    })
}

trait IntoInterval {
    fn into_interval(self) -> Interval;
}

impl IntoInterval for f64 {
    fn into_interval(self) -> Interval {
        Interval::new(self.next_down().next_down(), self.next_up().next_up())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceRow {
    pub order: u32,
    pub at: f64,
    pub meshes: Vec<f64>,
    pub values: Vec<f64>,
    /// `|D_{h/10}| / |D_h|` for consecutive meshes.
    pub growth: Vec<f64>,
    pub diverging: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoEntry {
    pub label: String,
    pub function: String,
    pub smoothness: Smoothness,
    pub seminorm: SeminormEstimate,
    /// Orders past the smoothness order probed at the singular points.
    pub divided_differences: Vec<DivergenceRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JorisDemoReport {
    pub j: u32,
    pub weight: String,
    pub rho: f64,
    pub k_max: u32,
    pub entries: Vec<DemoEntry>,
    /// Every seminorm finite and no divided difference diverging.
    pub well_conditioned: bool,
}

/// Mesh ladder for the divided-difference probes, refined by ×10.
pub const DEMO_MESHES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Seminorms of `f^j`, `f^{j+1}` and `f` on `[-1, 1]`, with divided
/// differences wherever a derivative is missing.
pub fn joris_demo(
    f: &TestFunction1D,
    j: u32,
    m: &WeightSequence,
    rho: f64,
    k_max: u32,
) -> Result<JorisDemoReport, NumericError> {
    if k_max > 20 || j == 0 {
        return Err(NumericError::InvalidInput("joris demo needs j ≥ 1 and k_max ≤ 20".into()));
    }
    let cases = [
        (format!("f^{j}"), f.power(j)),
        (format!("f^{}", j + 1), f.power(j + 1)),
        ("f".to_string(), f.clone()),
    ];
    let mut entries = Vec::new();
    for (label, g) in cases {
        let seminorm = seminorm(&g, (-1.0, 1.0), m, rho, k_max, 201)?;
        let smooth = g.smoothness();
        let mut rows = Vec::new();
        for s in g.singular_points() {
            for k in 0..=k_max {
                if smooth.admits(k) {
                    continue;
                }
                let values: Vec<f64> = DEMO_MESHES.iter().map(|&h| divided_difference(&g, k, s, h).value).collect();
                let growth: Vec<f64> = values.windows(2).map(|w| w[1].abs() / w[0].abs()).collect();
                let diverging = growth.iter().all(|r| *r >= 5.0);
                rows.push(DivergenceRow {
                    order: k,
                    at: s,
                    meshes: DEMO_MESHES.to_vec(),
                    values,
                    growth,
                    diverging,
                });
            }
        }
        entries.push(DemoEntry {
            label,
            function: g.label(),
            smoothness: smooth,
            seminorm,
            divided_differences: rows,
        });
    }
    let well_conditioned = entries
        .iter()
        .all(|e| e.seminorm.value.hi.is_finite() && e.divided_differences.iter().all(|r| !r.diverging));
    Ok(JorisDemoReport {
        j,
        weight: m.spec(),
        rho,
        k_max,
        entries,
        well_conditioned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_on_unit_interval() {
        let f = TestFunction1D::parse("exp").unwrap();
        let s = seminorm(&f, (0.0, 1.0), &WeightSequence::gevrey("1"), 1.0, 30, 101).unwrap();
        assert!(s.value.contains(std::f64::consts::E, 0.0), "{}", s.value);
        assert_eq!((s.arg_k, s.arg_x), (0, 1.0));
    }

    #[test]
    fn square_and_zero() {
        let f = TestFunction1D::parse("poly:0,0,1").unwrap();
        let s = seminorm(&f, (-1.0, 1.0), &WeightSequence::gevrey("2"), 1.0, 10, 101).unwrap();
        assert!(s.value.contains(2.0, 0.0));
        assert_eq!(s.arg_k, 1);
        let z = TestFunction1D::parse("poly:0").unwrap();
        let s = seminorm(&z, (-1.0, 1.0), &WeightSequence::gevrey("2"), 1.0, 10, 101).unwrap();
        assert_eq!(s.value, Interval::zero());
    }

    #[test]
    fn fourth_difference_of_cube_blows_up() {
        let f = TestFunction1D::parse("abs:3").unwrap();
        let d1 = divided_difference(&f, 4, 0.0, 1e-2);
        let d2 = divided_difference(&f, 4, 0.0, 1e-3);
        assert!(d1.exact);
        assert!((d1.value - 800.0).abs() < 1e-9);
        assert!(d2.value / d1.value >= 10.0);
    }

    #[test]
    fn demo_on_absolute_value() {
        let r = joris_demo(&TestFunction1D::parse("abs:1").unwrap(), 2, &WeightSequence::gevrey("1"), 1.0, 6).unwrap();
        assert!(r.entries[0].seminorm.value.hi.is_finite());
        assert!(r.entries[0].divided_differences.is_empty());
        let row = r.entries[1].divided_differences.iter().find(|row| row.order == 4).unwrap();
        assert!(row.diverging && row.growth.iter().all(|g| *g >= 10.0));
        assert!(!r.well_conditioned);
        let smooth = joris_demo(&TestFunction1D::parse("expm1").unwrap(), 2, &WeightSequence::gevrey("1"), 1.0, 10).unwrap();
        assert!(smooth.well_conditioned);
    }
}
