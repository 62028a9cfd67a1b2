//! Numerical checks of the quantitative lemmas: polarization, the `h`
//! inequalities, three lines on ellipses, the Cauchy transform, and
//! seminorm demonstrations of consecutive powers.

mod cauchy;
mod ellipse;
mod lemmas;
mod polarization;
mod seminorm;
mod suites;
mod test_function;

use thiserror::Error;

use crate::weight_core::WeightError;

pub use cauchy::{
    cauchy_transform, cauchy_values, sample_grid, BoxDomain, CauchyReport, Density, DiskIndicator, GridFunction,
    ResidualReport, ZeroDensity, DBAR_STEP, DEFAULT_CAUCHY_ORDER, MAX_CAUCHY_ORDER,
};
pub use ellipse::{sup_norm_ellipse, sup_norm_segment, ComplexPoly, EllipseDomain};
pub use lemmas::{
    h_lemma_check, mg_constant, three_lines_check, HLemmaReport, InequalityReport, ThreeLinesInstance,
    ThreeLinesReport, Witness, DEFAULT_MG_HORIZON, THREE_LINES_SAMPLES,
};
pub use polarization::{polarization_check, radical_inverse, sphere_point, MultiPoly, PolarizationMargins, Tensor};
pub use seminorm::{
    divided_difference, joris_demo, seminorm, uniform_grid, DemoEntry, DivergenceRow, DividedDifference, Gap,
    JorisDemoReport, SeminormEstimate, DEMO_MESHES,
};
pub use suites::{
    CauchySuite, HLemmaSuite, JorisDemoSuite, PolarizationSuite, PropertySuite, SuiteConfig, SuiteOutcome,
    SuiteRegistry, ThreeLinesSuite,
};
pub use test_function::{Smoothness, TestFunction1D};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sampling did not stabilize within {samples} samples")]
    SamplingBudgetExceeded { samples: u64 },
    #[error("derivative of order {k} unavailable at t = {t}")]
    DerivativeUnavailable { k: u32, t: f64 },
    #[error("quadrature order {order} exceeds the limit {limit}")]
    QuadratureBudgetExceeded { order: usize, limit: usize },
    #[error(transparent)]
    Weight(#[from] WeightError),
}
