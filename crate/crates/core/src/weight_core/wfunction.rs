//! Weight functions `ω` and numerical checks of the axioms on a grid.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;

use crate::exact::{parse_rational, Verdict};

use super::sequence::approx;
use super::WeightError;

pub trait WeightFunction: Send + Sync + fmt::Debug {
    fn spec(&self) -> String;
    /// `ω(t)` for `t ≥ 0`.
    fn eval(&self, t: f64) -> f64;
}

/// `ω(t) = t^α`, `0 < α ≤ 1`.
#[derive(Debug, Clone)]
pub struct Power {
    pub alpha: f64,
    label: String,
}

impl WeightFunction for Power {
    fn spec(&self) -> String {
        format!("power:{}", self.label)
    }
    fn eval(&self, t: f64) -> f64 {
        t.powf(self.alpha)
    }
}

/// `ω(t) = log(1+t)^β`, `β > 0`.
#[derive(Debug, Clone)]
pub struct LogPower {
    pub beta: f64,
    label: String,
}

impl WeightFunction for LogPower {
    fn spec(&self) -> String {
        format!("logpower:{}", self.label)
    }
    fn eval(&self, t: f64) -> f64 {
        t.ln_1p().powf(self.beta)
    }
}

/// Piecewise-linear interpolation of `(t, ω)` samples; constant extension
/// is not attempted, so evaluation outside the samples is NaN.
#[derive(Debug, Clone)]
pub struct TabulatedWeight {
    points: Vec<(f64, f64)>,
}

impl TabulatedWeight {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.len() < 2 {
            return Err("table needs at least two points".into());
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err("table abscissae must be strictly increasing".into());
        }
        Ok(Self { points })
    }
}

impl WeightFunction for TabulatedWeight {
    fn spec(&self) -> String {
        format!("table:{} points", self.points.len())
    }
    fn eval(&self, t: f64) -> f64 {
        let i = self.points.partition_point(|(x, _)| *x <= t);
        if i == 0 || (i == self.points.len() && t > self.points[i - 1].0) {
            return f64::NAN;
        }
        let (x1, y1) = self.points[i - 1];
        if i == self.points.len() || x1 == t {
            return y1;
        }
        let (x2, y2) = self.points[i];
        y1 + (y2 - y1) * (t - x1) / (x2 - x1)
    }
}

type Builder = fn(&str) -> Result<Arc<dyn WeightFunction>, String>;

pub struct WeightFunctionRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

fn positive(label: &str) -> Result<f64, String> {
    let r = parse_rational(label)?;
    let x = approx(&r);
    if !(x > 0.0) {
        return Err(format!("parameter must be positive, got {label}"));
    }
    Ok(x)
}

impl Default for WeightFunctionRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("power", |p| {
            let alpha = positive(p)?;
            if alpha > 1.0 {
                return Err(format!("power exponent must lie in (0, 1], got {p}"));
            }
            Ok(Arc::new(Power {
                alpha,
                label: p.to_string(),
            }))
        });
        r.register("logpower", |p| {
            Ok(Arc::new(LogPower {
                beta: positive(p)?,
                label: p.to_string(),
            }))
        });
        r.register("table", |p| {
            let points = p
                .split(',')
                .map(|pair| {
                    let (t, w) = pair
                        .split_once('=')
                        .ok_or_else(|| format!("expected t=ω, got `{pair}`"))?;
                    let t: f64 = t.trim().parse().map_err(|_| format!("bad abscissa `{t}`"))?;
                    let w: f64 = w.trim().parse().map_err(|_| format!("bad value `{w}`"))?;
                    Ok((t, w))
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Arc::new(TabulatedWeight::new(points)?))
        });
        r
    }
}

impl WeightFunctionRegistry {
    pub fn register(&mut self, name: &'static str, builder: Builder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Parses `power:1/2`, `logpower:2` or `table:1=0,10=2.3,...`.
    pub fn parse(&self, spec: &str) -> Result<Arc<dyn WeightFunction>, WeightError> {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let b = self.builders.get(name.trim()).ok_or_else(|| {
            WeightError::InvalidSpec(format!(
                "unknown weight function `{name}` (known: {})",
                self.names().join(", ")
            ))
        })?;
        b(params.trim()).map_err(|e| WeightError::InvalidSpec(format!("{name}: {e}")))
    }

    /// `{"kind": "power", "parameters": "1/2"}` or `{"kind": "table", "points": [[t, ω], ...]}`.
    pub fn from_json(&self, v: &Value) -> Result<Arc<dyn WeightFunction>, WeightError> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| WeightError::InvalidSpec("kind: missing".into()))?;
        if let Some(pts) = v.get("points") {
            let list = pts
                .as_array()
                .ok_or_else(|| WeightError::InvalidSpec("points: expected a list".into()))?;
            let points = list
                .iter()
                .enumerate()
                .map(|(i, p)| match p.as_array().map(|a| a.as_slice()) {
                    Some([t, w]) => match (t.as_f64(), w.as_f64()) {
                        (Some(t), Some(w)) => Ok((t, w)),
                        _ => Err(WeightError::InvalidSpec(format!("points[{i}]: expected numbers"))),
                    },
                    _ => Err(WeightError::InvalidSpec(format!("points[{i}]: expected [t, ω]"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Arc::new(TabulatedWeight::new(points).map_err(WeightError::InvalidSpec)?));
        }
        let params = match v.get("parameters") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            None => String::new(),
            Some(other) => return Err(WeightError::InvalidSpec(format!("parameters: unexpected {other}"))),
        };
        self.parse(&format!("{kind}:{params}"))
    }
}

/// Thresholds for the trend tests.
///
/// Over the upper half of the grid (by `ln t`), the least-squares slope of
/// `ln ratio` against `ln t` decides: `O(·)` needs slope `≤ slope_tol`,
/// `o(·)` needs slope `≤ -slope_tol` and a nonincreasing ratio.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrendConfig {
    pub slope_tol: f64,
    /// Relative slack for second-difference signs.
    pub curvature_tol: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            slope_tol: 0.02,
            curvature_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendResult {
    pub verdict: Verdict,
    pub slope: f64,
    pub first_ratio: f64,
    pub last_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightFunctionReport {
    pub spec: String,
    pub grid_points: usize,
    pub grid_range: (f64, f64),
    pub increasing: bool,
    /// `ω(2t) = O(ω(t))`.
    pub axiom1: TrendResult,
    /// `ω(t) = o(t)`.
    pub axiom2: TrendResult,
    /// `log t = o(ω(t))`.
    pub axiom3: TrendResult,
    /// `s ↦ ω(e^s)` convex on `s ≥ 0`.
    pub axiom4: Verdict,
    pub concave: Verdict,
    pub config: TrendConfig,
}

/// 81 points `10^{i/10}`, `0 ≤ i ≤ 80`.
pub fn default_weight_grid() -> Vec<f64> {
    (0..=80).map(|i| 10f64.powf(i as f64 / 10.0)).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn trend(grid: &[f64], ratio: impl Fn(f64) -> f64, little_o: bool, cfg: &TrendConfig) -> TrendResult {
    let tail: Vec<f64> = grid[grid.len() / 2..].to_vec();
    let r: Vec<f64> = tail.iter().map(|&t| ratio(t)).collect();
    let xs: Vec<f64> = tail.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let s = slope(&xs, &ys);
    let ok = if little_o {
        s <= -cfg.slope_tol && r.windows(2).all(|w| w[1] <= w[0] * (1.0 + cfg.curvature_tol))
    } else {
        s <= cfg.slope_tol
    };
    TrendResult {
        verdict: if ok { Verdict::Holds } else { Verdict::Violated },
        slope: s,
        first_ratio: r[0],
        last_ratio: *r.last().expect("nonempty"),
    }
}

/// Slopes of consecutive chords are monotone (nondecreasing for convex).
fn chords_monotone(xs: &[f64], ys: &[f64], convex: bool, tol: f64) -> bool {
    let chords: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    chords.windows(2).all(|c| {
        let slack = tol * c[0].abs().max(c[1].abs()).max(1.0);
        if convex {
            c[1] >= c[0] - slack
        } else {
            c[1] <= c[0] + slack
        }
    })
}

pub fn weight_function_check(
    w: &dyn WeightFunction,
    grid: &[f64],
    cfg: &TrendConfig,
) -> Result<WeightFunctionReport, WeightError> {
    if grid.len() < 32 {
        return Err(WeightError::GridTooCoarse { points: grid.len() });
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) || grid[0] <= 0.0 {
        return Err(WeightError::InvalidSpec("grid must be positive and strictly increasing".into()));
    }
    if grid[0] > 1.0 || *grid.last().expect("nonempty") < 1e6 {
        return Err(WeightError::InvalidSpec("grid must cover [1, 10^6]".into()));
    }
    let vals: Vec<f64> = grid.iter().map(|&t| w.eval(t)).collect();
    if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(WeightError::InvalidSpec(format!("{} is not finite and nonnegative on the grid", w.spec())));
    }
    let increasing = vals.windows(2).all(|v| v[1] >= v[0]);

    let upper = *grid.last().expect("nonempty");
    // axiom 1 doubles the argument, so keep 2t inside the tabulated range
    let half: Vec<f64> = grid.iter().copied().filter(|&t| 2.0 * t <= upper).collect();
    let axiom1 = trend(&half, |t| w.eval(2.0 * t) / w.eval(t), false, cfg);
    let axiom2 = trend(grid, |t| w.eval(t) / t, true, cfg);
    let above_one: Vec<f64> = grid.iter().copied().filter(|&t| t > 1.0).collect();
    let axiom3 = trend(&above_one, |t| t.ln() / w.eval(t), true, cfg);

    let from_one: Vec<(f64, f64)> = grid.iter().zip(&vals).filter(|(t, _)| **t >= 1.0).map(|(t, v)| (*t, *v)).collect();
    let s: Vec<f64> = from_one.iter().map(|(t, _)| t.ln()).collect();
    let phi: Vec<f64> = from_one.iter().map(|(_, v)| *v).collect();
    let verdict = |b: bool| if b { Verdict::Holds } else { Verdict::Violated };
    let axiom4 = verdict(chords_monotone(&s, &phi, true, cfg.curvature_tol));
    let concave = verdict(chords_monotone(grid, &vals, false, cfg.curvature_tol));

    Ok(WeightFunctionReport {
        spec: w.spec(),
        grid_points: grid.len(),
        grid_range: (grid[0], upper),
        increasing,
        axiom1,
        axiom2,
        axiom3,
        axiom4,
        concave,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(spec: &str) -> WeightFunctionReport {
        let w = WeightFunctionRegistry::default().parse(spec).unwrap();
        weight_function_check(w.as_ref(), &default_weight_grid(), &TrendConfig::default()).unwrap()
    }

    #[test]
    fn square_root_is_a_concave_weight() {
        let r = check("power:1/2");
        assert!(r.increasing);
        for v in [r.axiom1.verdict, r.axiom2.verdict, r.axiom3.verdict, r.axiom4, r.concave] {
            assert_eq!(v, Verdict::Holds);
        }
    }

    #[test]
    fn identity_is_not_little_o_of_t() {
        let r = check("power:1");
        assert_eq!(r.axiom2.verdict, Verdict::Violated);
        assert_eq!(r.axiom1.verdict, Verdict::Holds);
    }

    #[test]
    fn logarithm_fails_the_growth_axiom() {
        let r = check("logpower:1");
        assert_eq!(r.axiom3.verdict, Verdict::Violated);
        assert_eq!(r.axiom2.verdict, Verdict::Holds);
        assert_eq!(r.axiom4, Verdict::Holds);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let w = WeightFunctionRegistry::default().parse("power:1/2").unwrap();
        let grid: Vec<f64> = (0..10).map(|i| 10f64.powi(i)).collect();
        assert_eq!(
            weight_function_check(w.as_ref(), &grid, &TrendConfig::default()).unwrap_err(),
            WeightError::GridTooCoarse { points: 10 }
        );
    }

    #[test]
    fn tables_interpolate() {
        let w = WeightFunctionRegistry::default().parse("table:1=1,3=2,5=4").unwrap();
        assert_eq!(w.eval(2.0), 1.5);
        assert_eq!(w.eval(5.0), 4.0);
        assert!(w.eval(6.0).is_nan());
    }
}
