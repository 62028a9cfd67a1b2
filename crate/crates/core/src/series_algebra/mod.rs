//! Exact truncated series and the construction of Joris identities.

mod coin;
mod format;
mod germ;
mod identity;
mod nullspace;
mod series;

pub use coin::coin_representation;
pub use format::{parse_phi, parse_terms, CertificateTrace, GermFile, IdentityCertificate, SparseSeries};
pub use germ::{preprocess_germ, support_gcd, AnalyticGerm, GcdStatus};
pub use identity::{
    construct_identity, verify_identity, IdentitySearch, JorisIdentity, ResidualReport, SearchTrace,
};
pub use nullspace::{mat_vec, nullspace_over_laurent};
pub use series::{SeriesOp, TruncatedSeries};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("precision exhausted (result known only to O(z^{precision})); raise the truncation order")]
    PrecisionExhausted { precision: i64 },
    #[error("series is not a unit to the known precision")]
    NotAUnit,
    #[error("bad valuation: expected {expected}, found {found}")]
    BadValuation { expected: String, found: i64 },
    #[error("support gcd is {gcd}, not 1; no Joris identity exists")]
    GcdViolation { gcd: u64 },
    #[error("no gamma with |gamma_i| <= {bound} preserves the support gcd {target} (best achieved {best})")]
    CollapseFailed { bound: i64, target: u64, best: u64 },
    #[error("every nullspace vector gave H = 0 to precision ({trace})")]
    NoNonzeroH { trace: String },
    #[error("{p} and {q} are not coprime")]
    NotCoprime { p: u64, q: u64 },
    #[error("invalid germ: {0}")]
    InvalidGerm(String),
}
