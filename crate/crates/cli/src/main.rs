//! `ultrajoris`: weight-sequence analytics, Joris identities and numerical
//! property suites from the command line.

mod germ;
mod report;
mod verify;
mod weights;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use report::{Finding, InputDigest, InputError, Outcome, RunReport, Timing};

#[derive(Parser, Debug)]
#[command(name = "ultrajoris", version, about = "Weight sequences, Joris identities and numerical checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized sweep.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for library parallelism (default 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// h/Γ, mg, admissibility, regularity and weight-function checks.
    Weights(weights::WeightsArgs),
    /// Support gcd, preprocessing, identity construction and verification.
    Germ(germ::GermArgs),
    /// Run a numerical property suite (or `all`).
    Verify(verify::VerifyArgs),
}

/// Inputs seen so far, folded into the report digest.
pub struct Context {
    pub seed: u64,
    digest: InputDigest,
}

impl Context {
    pub fn read(&mut self, field: &str, path: &Path) -> Result<String, InputError> {
        let text = fs::read_to_string(path).map_err(|e| InputError::new(field, format!("{}: {e}", path.display())))?;
        self.digest.add(&format!("file:{field}"), text.as_bytes());
        Ok(text)
    }

    pub fn env(&mut self, name: &str) -> Option<String> {
        let v = std::env::var(name).ok()?;
        self.digest.add(&format!("env:{name}"), v.as_bytes());
        Some(v)
    }
}

fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => Outcome::Error.exit_code(),
            };
        }
    };
    let threads = cli.threads.unwrap_or(1).max(1);
    // a second global init in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let start = Instant::now();
    let mut ctx = Context {
        seed: cli.seed,
        digest: InputDigest::default(),
    };
    for a in &argv[1..] {
        ctx.digest.add("arg", a.as_bytes());
    }
    let found = match &cli.command {
        Command::Weights(a) => weights::run(a, &mut ctx),
        Command::Germ(a) => germ::run(a, &mut ctx),
        Command::Verify(a) => verify::run(a, &mut ctx),
    };
    let finding = found.unwrap_or_else(|e| Finding {
        outcome: Outcome::Error,
        provenance: json!({}),
        result: json!({ "error": e }),
    });
    let report = RunReport {
        tool: "ultrajoris",
        version: env!("CARGO_PKG_VERSION"),
        command: argv[1..].to_vec(),
        inputs_digest: ctx.digest.finish(),
        verdict: finding.outcome,
        exit_code: finding.outcome.exit_code(),
        provenance: finding.provenance,
        result: finding.result,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("ultrajoris: cannot serialize report: {e}");
            return Outcome::Error.exit_code();
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("ultrajoris: --out {}: {e}", path.display());
                return Outcome::Error.exit_code();
            }
        }
        None => {
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    if finding.outcome == Outcome::Error {
        if let Some(err) = report.result.get("error") {
            eprintln!("ultrajoris: {}: {}", err["field"].as_str().unwrap_or("?"), err["message"].as_str().unwrap_or("?"));
        }
    }
    report.exit_code
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(run(&argv));
}
