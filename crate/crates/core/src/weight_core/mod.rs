//! Weight sequences, weight matrices and weight functions.
//!
//! Exact rationals throughout; logs and roots are carried as outward-rounded
//! intervals so that every verdict is one-sided sound.

mod admissible;
mod family;
mod gamma;
mod mg;
mod sequence;
mod wfunction;

pub use admissible::{
    check_admissible, check_gamma_domination, check_regularity_conditions, AdmissibilityConfig,
    AdmissibilityReport, Attempt, CountPair, GammaDomination, GammaFailure, Mode, Overall,
    RegularityFlag, RegularityReport, SequenceVerdict,
};
pub use family::{FamilyRegistry, Gevrey, Scaled, SequenceFamily, SquareExponential, Table, TailBehavior};
pub use gamma::{
    counting_functions, default_t_grid, dyadic_grid, h_and_gamma, h_log, is_saturated, t_zero, HGamma,
    EXACT_H_LIMIT,
};
pub use mg::{divergence_suspected, mg_estimate, MgEstimate, MG_THRESHOLD_LOG2};
pub use sequence::{approx, root_string, WeightMatrix, WeightSequence};
pub use wfunction::{
    default_weight_grid, weight_function_check, LogPower, Power, TabulatedWeight, TrendConfig, WeightFunction,
    WeightFunctionRegistry, WeightFunctionReport,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("invalid input: {0}")]
    InvalidSpec(String),
    #[error("index {k} lies beyond the table horizon {horizon}")]
    BeyondHorizon { k: u128, horizon: u64 },
    #[error("matrix not ordered: sequence {index} exceeds sequence {} at k = {k}", index + 1)]
    NotOrdered { index: usize, k: u64 },
    #[error("minimum not certified: the table ends before the tail is known (partial Γ̄ = {})", partial.gamma_upper)]
    NonCertifiableTail { partial: Box<HGamma> },
    #[error("no finite minimizer of m_k t^k at t = {t}")]
    NoFiniteMinimizer { t: String },
    #[error("grid too coarse: {points} points, need at least 32")]
    GridTooCoarse { points: usize },
}

impl WeightError {
    /// The message without the variant prefix, for nesting in other errors.
    pub fn detail(&self) -> String {
        match self {
            WeightError::InvalidSpec(s) => s.clone(),
            other => other.to_string(),
        }
    }
}
