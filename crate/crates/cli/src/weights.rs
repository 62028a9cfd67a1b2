//! `weights` subcommand.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use ultrajoris::exact::{parse_rational, Verdict};
use ultrajoris::weight_core::{
    check_admissible, check_regularity_conditions, default_t_grid, default_weight_grid, dyadic_grid, h_and_gamma,
    h_log, mg_estimate, weight_function_check, AdmissibilityConfig, Mode, Overall, TrendConfig, WeightError,
    WeightFunctionRegistry, WeightMatrix, WeightSequence, MG_THRESHOLD_LOG2,
};

use crate::report::{to_json, Finding, InputError, Outcome};
use crate::Context;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WeightsAction {
    /// h_m(t) with both counting functions.
    Gamma,
    /// The mg(M, N) estimate at a horizon.
    Mg,
    /// R- or B-admissibility of a weight matrix.
    Admissible,
    /// dc, almost-increasing and qr conditions.
    Regularity,
    /// Axioms of a weight function ω.
    WeightFunction,
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    #[arg(value_enum)]
    pub action: WeightsAction,
    /// Sequence spec such as `gevrey:2`; repeat for a pair or a matrix.
    /// For `weight-function` this names ω, e.g. `power:1/2`.
    #[arg(long = "family")]
    pub families: Vec<String>,
    /// JSON file holding `{"sequences": [...]}`.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// A single point `p/q`.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, default_value = "R")]
    pub mode: Mode,
    /// `dyadic:N` or a comma list of rationals (of reals for weight-function).
    #[arg(long)]
    pub grid: Option<String>,
}

/// Default horizon for mg estimates and regularity sups.
const DEFAULT_HORIZON: u64 = 256;

/// Indices over which a matrix's pointwise order is checked.
const ORDER_HORIZON: u64 = 64;

fn weight_err(field: &str, e: WeightError) -> InputError {
    InputError::new(field, e.detail())
}

fn sequence(spec: &str) -> Result<WeightSequence, InputError> {
    WeightSequence::parse(spec).map_err(|e| weight_err("--family", e))
}

fn t_grid(args: &WeightsArgs) -> Result<Vec<BigRational>, InputError> {
    if let Some(t) = &args.t {
        return Ok(vec![parse_positive(t, "--t")?]);
    }
    match args.grid.as_deref() {
        None => Ok(default_t_grid()),
        Some(g) => parse_t_grid(g),
    }
}

fn parse_positive(s: &str, field: &str) -> Result<BigRational, InputError> {
    let r = parse_rational(s.trim()).map_err(|e| InputError::new(field, e))?;
    if r <= BigRational::from_integer(0.into()) {
        return Err(InputError::new(field, format!("`{s}` is not positive")));
    }
    Ok(r)
}

fn parse_t_grid(g: &str) -> Result<Vec<BigRational>, InputError> {
    if let Some(n) = g.strip_prefix("dyadic:") {
        let n: u32 = n.trim().parse().map_err(|_| InputError::new("--grid", format!("bad dyadic depth `{n}`")))?;
        return Ok(dyadic_grid(n));
    }
    g.split(',').map(|s| parse_positive(s, "--grid")).collect()
}

fn matrix(args: &WeightsArgs, ctx: &mut Context) -> Result<WeightMatrix, InputError> {
    if let Some(path) = &args.matrix {
        let text = ctx.read("--matrix", path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| InputError::new("--matrix", e))?;
        return WeightMatrix::from_json(&v, ORDER_HORIZON).map_err(|e| weight_err("--matrix", e));
    }
    if args.families.is_empty() {
        return Err(InputError::new("--family", "give --matrix or at least one --family"));
    }
    let seqs = args.families.iter().map(|s| sequence(s)).collect::<Result<Vec<_>, _>>()?;
    WeightMatrix::new(seqs, ORDER_HORIZON).map_err(|e| weight_err("--family", e))
}

#[derive(Serialize)]
struct GammaRow {
    t: String,
    /// `None` with `h = 0` when no minimizer exists.
    h: Option<String>,
    h_log: Option<ultrajoris::exact::Interval>,
    gamma_upper: Option<u128>,
    gamma_lower: Option<u128>,
    certified: bool,
    note: Option<String>,
}

fn gamma_row(seq: &WeightSequence, t: &BigRational) -> Result<GammaRow, InputError> {
    match h_and_gamma(seq, t) {
        Ok(r) => Ok(GammaRow {
            t: r.t,
            h: r.h,
            h_log: Some(r.h_log),
            gamma_upper: Some(r.gamma_upper),
            gamma_lower: Some(r.gamma_lower),
            certified: r.certified,
            note: None,
        }),
        Err(WeightError::NonCertifiableTail { partial }) => Ok(GammaRow {
            t: partial.t,
            h: partial.h,
            h_log: Some(partial.h_log),
            gamma_upper: Some(partial.gamma_upper),
            gamma_lower: Some(partial.gamma_lower),
            certified: false,
            note: Some("minimum over the finite table only".into()),
        }),
        Err(WeightError::NoFiniteMinimizer { .. }) => {
            let zero = h_log(seq, t).map(|l| l.hi == f64::NEG_INFINITY).unwrap_or(false);
            Ok(GammaRow {
                t: t.to_string(),
                h: zero.then(|| "0".to_string()),
                h_log: None,
                gamma_upper: None,
                gamma_lower: None,
                certified: zero,
                note: Some("no finite minimizer; both counting functions are infinite".into()),
            })
        }
        Err(e) => Err(weight_err("--family", e)),
    }
}

pub fn run(args: &WeightsArgs, ctx: &mut Context) -> Result<Finding, InputError> {
    let horizon = args.horizon.unwrap_or(DEFAULT_HORIZON);
    match args.action {
        WeightsAction::Gamma => {
            let seq = sequence(args.families.first().ok_or_else(|| InputError::new("--family", "required"))?)?;
            let grid = t_grid(args)?;
            let rows = grid.iter().map(|t| gamma_row(&seq, t)).collect::<Result<Vec<_>, _>>()?;
            let outcome = if rows.iter().all(|r| r.certified) { Outcome::Pass } else { Outcome::Inconclusive };
            let prov = json!({"family": seq.spec(), "exact_h_limit": ultrajoris::weight_core::EXACT_H_LIMIT});
            if args.t.is_some() {
                Finding::new(outcome, prov, &rows[0])
            } else {
                Finding::new(outcome, prov, json!({ "rows": to_json(&rows)? }))
            }
        }
        WeightsAction::Mg => {
            let m = sequence(args.families.first().ok_or_else(|| InputError::new("--family", "required"))?)?;
            let n = match args.families.get(1) {
                Some(s) => sequence(s)?,
                None => m.clone(),
            };
            let est = mg_estimate(&m, &n, horizon).map_err(|e| weight_err("--family", e))?;
            let outcome = if est.is_finite_evidence() {
                Outcome::Pass
            } else if est.divergence_suspected {
                Outcome::Falsified
            } else {
                Outcome::Inconclusive
            };
            let prov = json!({"horizon": horizon, "threshold": format!("2^{MG_THRESHOLD_LOG2}")});
            Finding::new(
                outcome,
                prov,
                json!({"m": m.spec(), "n": n.spec(), "finite_evidence": est.is_finite_evidence(), "estimate": to_json(&est)?}),
            )
        }
        WeightsAction::Admissible => {
            let mat = matrix(args, ctx)?;
            let cfg = AdmissibilityConfig {
                mg_horizon: horizon,
                t_grid: match (&args.t, &args.grid) {
                    (None, None) => default_t_grid(),
                    _ => t_grid(args)?,
                },
                ..AdmissibilityConfig::default()
            };
            let r = check_admissible(&mat, args.mode, &cfg).map_err(|e| weight_err("--family", e))?;
            let outcome = match r.overall {
                Overall::CertifiedTrueAtHorizon => Outcome::Pass,
                Overall::Falsified => Outcome::Falsified,
                Overall::Inconclusive => Outcome::Inconclusive,
            };
            let prov = json!({"mg_horizon": horizon, "order_horizon": mat.order_horizon, "t_points": cfg.t_grid.len()});
            Finding::new(outcome, prov, &r)
        }
        WeightsAction::Regularity => {
            let mat = matrix(args, ctx)?;
            let r = check_regularity_conditions(&mat, args.mode, horizon).map_err(|e| weight_err("--family", e))?;
            let v = Verdict::all([r.dc.verdict, r.almost_increasing.verdict, r.qr.verdict]);
            Finding::new(v.into(), json!({"horizon": horizon}), &r)
        }
        WeightsAction::WeightFunction => {
            let spec = args.families.first().ok_or_else(|| InputError::new("--family", "required"))?;
            let w = WeightFunctionRegistry::default().parse(spec).map_err(|e| weight_err("--family", e))?;
            let grid = match &args.grid {
                None => default_weight_grid(),
                Some(g) => g
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| InputError::new("--grid", format!("bad point `{s}`"))))
                    .collect::<Result<_, _>>()?,
            };
            let r = weight_function_check(w.as_ref(), &grid, &TrendConfig::default()).map_err(|e| weight_err("--grid", e))?;
            let v = Verdict::all([
                r.axiom1.verdict,
                r.axiom2.verdict,
                r.axiom3.verdict,
                r.axiom4,
                if r.increasing { Verdict::Holds } else { Verdict::Violated },
            ]);
            Finding::new(v.into(), json!({"grid_points": grid.len()}), &r)
        }
    }
}
