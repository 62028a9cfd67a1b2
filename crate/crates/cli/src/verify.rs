//! `verify` subcommand.

use clap::Args;
use serde_json::json;

use ultrajoris::exact::Verdict;
use ultrajoris::joris_numeric::{NumericError, SuiteConfig, SuiteOutcome, SuiteRegistry};

use crate::report::{Finding, InputError};
use crate::Context;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    pub suite: String,
    /// Quadrature or truncation order passed to the suite.
    #[arg(long)]
    pub order: Option<usize>,
    /// Number of random cases, overriding the suite default.
    #[arg(long)]
    pub cases: Option<usize>,
}

pub fn run(args: &VerifyArgs, ctx: &mut Context) -> Result<Finding, InputError> {
    let registry = SuiteRegistry::default();
    let suites = if args.suite == "all" {
        registry.all().to_vec()
    } else {
        let s = registry.get(&args.suite).ok_or_else(|| {
            InputError::new("suite", format!("unknown suite `{}`; known: {}, all", args.suite, registry.names().join(", ")))
        })?;
        vec![s]
    };
    let cfg = SuiteConfig {
        seed: ctx.seed,
        cases: args.cases,
        order: args.order,
    };
    let mut outcomes = Vec::with_capacity(suites.len());
    for s in &suites {
        let out = match s.run(&cfg) {
            Ok(o) => o,
            Err(e @ (NumericError::InvalidInput(_) | NumericError::QuadratureBudgetExceeded { .. })) => {
                return Err(InputError::new(s.name(), e));
            }
            // a budget hit mid-run leaves the property undecided
            Err(e) => SuiteOutcome {
                suite: s.name().to_string(),
                verdict: Verdict::Inconclusive,
                cases: 0,
                summary: e.to_string(),
                details: json!(null),
            },
        };
        outcomes.push(out);
    }
    let verdict = Verdict::all(outcomes.iter().map(|o| o.verdict));
    Finding::new(verdict.into(), json!({"config": cfg}), json!({"suites": outcomes}))
}
