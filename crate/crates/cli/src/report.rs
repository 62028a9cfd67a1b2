//! The machine-readable report every subcommand emits.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use ultrajoris::exact::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Falsified,
    Inconclusive,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Falsified => 1,
            Outcome::Inconclusive => 2,
            Outcome::Error => 3,
        }
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Holds => Outcome::Pass,
            Verdict::Violated => Outcome::Falsified,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

/// A failure tied to the input that caused it.
#[derive(Clone, Debug, Serialize)]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl InputError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

/// What a subcommand hands back before it is wrapped in a report.
pub struct Finding {
    pub outcome: Outcome,
    /// Horizon, precision and grid settings the verdict depends on.
    pub provenance: Value,
    pub result: Value,
}

impl Finding {
    pub fn new(outcome: Outcome, provenance: Value, result: impl Serialize) -> Result<Self, InputError> {
        Ok(Self {
            outcome,
            provenance,
            result: to_json(&result)?,
        })
    }
}

pub fn to_json(v: &impl Serialize) -> Result<Value, InputError> {
    serde_json::to_value(v).map_err(|e| InputError::new("report", e))
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub verdict: Outcome,
    pub exit_code: i32,
    pub provenance: Value,
    pub result: Value,
    /// The only field allowed to differ between identical runs.
    pub timing: Timing,
}

/// sha256 over the arguments and the bytes of every input read.
#[derive(Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}
