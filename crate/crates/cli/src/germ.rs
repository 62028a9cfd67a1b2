//! `germ` subcommand.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use ultrajoris::series_algebra::{
    coin_representation, construct_identity, parse_phi, parse_terms, preprocess_germ, support_gcd, verify_identity,
    AnalyticGerm, GcdStatus, GermFile, IdentityCertificate, IdentitySearch, SeriesError, TruncatedSeries,
};

use crate::report::{Finding, InputError, Outcome};
use crate::Context;

/// Overrides the default truncation order when `--order` is absent.
pub const ORDER_ENV: &str = "ULTRAJORIS_DEFAULT_ORDER";

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GermAction {
    /// Support gcd of the germ.
    Gcd,
    /// Normalize to `(t^p, φ)` and collapse extra components.
    Preprocess,
    /// Construct and certify `t^{1+pq} = Σ α_j(t^p) φ^j`.
    Identity,
    /// Recheck a stored certificate against a germ.
    Verify,
    /// Write `j = a·p + b·q` in the semigroup ⟨p, q⟩.
    Coin,
}

#[derive(Args, Debug)]
pub struct GermArgs {
    #[arg(value_enum)]
    pub action: GermAction,
    /// Germ file; for `verify`, the certificate followed by an optional germ file.
    pub inputs: Vec<PathBuf>,
    /// Exponent of the leading component `t^p`.
    #[arg(long)]
    pub p: Option<i64>,
    /// Second component as an expression in `t`, e.g. `t^3+t^5`.
    #[arg(long)]
    pub phi: Option<String>,
    /// Certification order T.
    #[arg(long)]
    pub order: Option<i64>,
    /// Largest |γ_i| tried when collapsing three or more components.
    #[arg(long = "gamma-bound", default_value_t = 2)]
    pub gamma_bound: i64,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub j: Option<u64>,
}

struct Loaded {
    germ: AnalyticGerm,
    order: i64,
    source: Value,
}

/// `max(64, 4p(1 + e_max))`.
fn formula_order(p: i64, max_exp: i64) -> i64 {
    64.max(4 * p * (1 + max_exp))
}

fn resolve_order(args: &GermArgs, ctx: &mut Context, file_order: Option<i64>, p: i64, max_exp: i64) -> Result<(i64, &'static str), InputError> {
    if let Some(t) = args.order {
        return Ok((t, "--order"));
    }
    if let Some(t) = file_order {
        return Ok((t, "file"));
    }
    if let Some(v) = ctx.env(ORDER_ENV) {
        let t = v.trim().parse::<i64>().map_err(|_| InputError::new(ORDER_ENV, format!("not an integer: `{v}`")))?;
        return Ok((t, "env"));
    }
    Ok((formula_order(p, max_exp), "default"))
}

fn series_err(field: &str, e: SeriesError) -> InputError {
    InputError::new(field, e)
}

/// `Err(Ok(finding))` short-circuits with a verdict, `Err(Err(_))` with bad input.
type Load<T> = Result<T, Result<Finding, InputError>>;

fn collapse_outcome(e: SeriesError, field: &str) -> Result<Finding, InputError> {
    match e {
        SeriesError::CollapseFailed { bound, target, best } => Finding::new(
            Outcome::Falsified,
            json!({"gamma_bound": bound}),
            json!({"error": "CollapseFailed", "target_gcd": target, "best_gcd": best}),
        ),
        other => Err(series_err(field, other)),
    }
}

fn load_file(args: &GermArgs, ctx: &mut Context, path: &PathBuf) -> Load<Loaded> {
    let field = path.display().to_string();
    let text = ctx.read("germ", path).map_err(Err)?;
    let file = GermFile::parse(&text).map_err(|e| Err(InputError::new(&field, e)))?;
    let max_exp = file.max_exponent().map_err(|e| Err(InputError::new(&field, e)))?;
    let probe = file.components_at(max_exp + 1).map_err(|e| Err(InputError::new(&field, e)))?;
    let p = probe.iter().filter(|s| !s.is_zero()).map(TruncatedSeries::valuation).min().unwrap_or(1);
    let (order, order_from) = resolve_order(args, ctx, file.order, p, max_exp).map_err(Err)?;
    if order < 1 {
        return Err(Err(InputError::new("--order", "must be positive")));
    }
    let built = if file.truncated {
        // a truncated series is known only as far as its file says
        let known = file.order.unwrap_or(max_exp + 1);
        let raw = file.components_at(known).map_err(|e| Err(InputError::new(&field, e)))?;
        preprocess_germ(&raw, args.gamma_bound)
    } else {
        let raw = file.components_at(order.max(max_exp + 1)).map_err(|e| Err(InputError::new(&field, e)))?;
        AnalyticGerm::from_polynomials(&raw, args.gamma_bound)
    };
    let germ = built.map_err(|e| collapse_outcome(e, &field))?;
    Ok(Loaded {
        germ,
        order,
        source: json!({"germ_file": field, "truncated": file.truncated, "order_from": order_from}),
    })
}

fn load_phi(args: &GermArgs, ctx: &mut Context) -> Load<Loaded> {
    let p = args.p.ok_or_else(|| Err(InputError::new("--p", "required with --phi")))?;
    let phi = args.phi.as_deref().ok_or_else(|| Err(InputError::new("--phi", "required with --p")))?;
    if p < 1 {
        return Err(Err(InputError::new("--p", "must be at least 1")));
    }
    let terms = parse_terms(phi, 't').map_err(|e| Err(InputError::new("--phi", e)))?;
    let max_exp = terms.iter().map(|(e, _)| *e).max().unwrap_or(0).max(p);
    let (order, order_from) = resolve_order(args, ctx, None, p, max_exp).map_err(Err)?;
    if order < 1 {
        return Err(Err(InputError::new("--order", "must be positive")));
    }
    let series = parse_phi(phi, 't', order.max(max_exp + 1)).map_err(|e| Err(InputError::new("--phi", e)))?;
    let germ = AnalyticGerm::monomial_pair(p, series).map_err(|e| Err(series_err("--phi", e)))?;
    Ok(Loaded {
        germ,
        order,
        source: json!({"p": p, "phi": phi, "order_from": order_from}),
    })
}

fn load(args: &GermArgs, ctx: &mut Context, file: Option<&PathBuf>) -> Load<Loaded> {
    match (file, &args.phi) {
        (Some(_), Some(_)) => Err(Err(InputError::new("--phi", "give a germ file or --p/--phi, not both"))),
        (Some(path), None) => load_file(args, ctx, path),
        (None, Some(_)) => load_phi(args, ctx),
        (None, None) => Err(Err(InputError::new("input", "give a germ file or --p/--phi"))),
    }
}

fn provenance(l: &Loaded, extra: Value) -> Value {
    let mut v = json!({
        "order": l.order,
        "precision": l.germ.precision,
        "collapse_gamma": l.germ.gamma,
        "source": l.source,
    });
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

fn gcd_finding(l: &Loaded) -> Result<Finding, InputError> {
    let (gcd, status) = support_gcd(&l.germ);
    let outcome = match (gcd, status) {
        (1, _) => Outcome::Pass,
        (_, GcdStatus::Certified) => Outcome::Falsified,
        (_, GcdStatus::TentativeAtT) => Outcome::Inconclusive,
    };
    Finding::new(outcome, provenance(l, json!({})), json!({"gcd": gcd, "status": status, "support": l.germ.support}))
}

fn identity_finding(l: &Loaded) -> Result<Finding, InputError> {
    let search = IdentitySearch::default();
    let prov = provenance(
        l,
        json!({"max_nullspace_vectors": search.max_nullspace_vectors, "max_attempts": search.max_attempts}),
    );
    match construct_identity(&l.germ, l.order, &search) {
        Ok(id) => {
            let outcome = if id.certified { Outcome::Pass } else { Outcome::Inconclusive };
            let cert = IdentityCertificate::from(&id);
            Finding::new(
                outcome,
                prov,
                json!({
                    "p": id.p,
                    "q": id.q,
                    "target_exponent": 1 + id.p * id.q,
                    "certified": id.certified,
                    "residual_valuation": id.residual_valuation,
                    "cert_order": id.cert_order,
                    "alphas": id.alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "certificate": cert,
                }),
            )
        }
        Err(SeriesError::GcdViolation { gcd }) => {
            Finding::new(Outcome::Falsified, prov, json!({"error": "GcdViolation", "gcd": gcd}))
        }
        Err(e @ (SeriesError::PrecisionExhausted { .. } | SeriesError::NoNonzeroH { .. })) => Finding::new(
            Outcome::Inconclusive,
            prov,
            json!({"error": format!("{e:?}").split([' ', '{']).next().unwrap_or("").to_string(), "message": e.to_string()}),
        ),
        Err(e) => Err(series_err("germ", e)),
    }
}

/// Accepts a bare certificate or a full `germ identity` report.
fn read_certificate(ctx: &mut Context, path: &PathBuf) -> Result<IdentityCertificate, InputError> {
    let field = path.display().to_string();
    let text = ctx.read("certificate", path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| InputError::new(&field, e))?;
    let cert = match v.pointer("/result/certificate") {
        Some(c) => c.clone(),
        None => v,
    };
    serde_json::from_value(cert).map_err(|e| InputError::new(&field, format!("not a certificate: {e}")))
}

pub fn run(args: &GermArgs, ctx: &mut Context) -> Result<Finding, InputError> {
    match args.action {
        GermAction::Coin => {
            let need = |v: Option<u64>, f: &str| v.ok_or_else(|| InputError::new(f, "required for coin"));
            let j = need(args.j, "--j")?;
            let q = need(args.q, "--q")?;
            let p = args.p.ok_or_else(|| InputError::new("--p", "required for coin"))?;
            let p = u64::try_from(p).map_err(|_| InputError::new("--p", "must be nonnegative"))?;
            let rep = coin_representation(j, p, q).map_err(|e| series_err("--q", e))?;
            let outcome = if rep.is_some() { Outcome::Pass } else { Outcome::Falsified };
            let rep = rep.map(|(a, b)| json!({"a": a, "b": b}));
            Finding::new(outcome, json!({}), json!({"j": j, "p": p, "q": q, "representation": rep}))
        }
        GermAction::Gcd | GermAction::Preprocess | GermAction::Identity => {
            if args.inputs.len() > 1 {
                return Err(InputError::new("input", "expected at most one germ file"));
            }
            let l = match load(args, ctx, args.inputs.first()) {
                Ok(l) => l,
                Err(done) => return done,
            };
            match args.action {
                GermAction::Gcd => gcd_finding(&l),
                GermAction::Identity => identity_finding(&l),
                _ => {
                    let g = &l.germ;
                    Finding::new(
                        Outcome::Pass,
                        provenance(&l, json!({})),
                        json!({
                            "p": g.p,
                            "phi": g.phi.to_string(),
                            "support": g.support,
                            "field": g.field,
                            "precision": g.precision,
                            "gamma": g.gamma,
                            "extra_components": g.extra_components.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                        }),
                    )
                }
            }
        }
        GermAction::Verify => {
            let cert_path = args.inputs.first().ok_or_else(|| InputError::new("input", "certificate file required"))?;
            if args.inputs.len() > 2 {
                return Err(InputError::new("input", "expected a certificate and at most one germ file"));
            }
            let cert = read_certificate(ctx, cert_path)?;
            let l = match load(args, ctx, args.inputs.get(1)) {
                Ok(l) => l,
                Err(done) => return done,
            };
            let order = args.order.unwrap_or(cert.cert_order);
            if cert.p != l.germ.p {
                return Err(InputError::new("certificate", format!("certificate has p = {}, germ has p = {}", cert.p, l.germ.p)));
            }
            let r = verify_identity(&cert.to_identity(), &l.germ, order);
            let outcome = if r.certified { Outcome::Pass } else { Outcome::Falsified };
            let mut prov = provenance(&l, json!({"certificate": cert_path.display().to_string()}));
            prov["order"] = json!(order);
            Finding::new(outcome, prov, json!({"p": cert.p, "q": cert.q, "residual": r}))
        }
    }
}
