//! Exact scalars shared by the algebraic and analytic modules.

mod coefficient;
mod interval;
mod rational;

pub use coefficient::{Coefficient, Field};
pub use interval::Interval;
pub use rational::{
    ceil_div, factorial, gcd_u64, integer_root_floor, ln_bigint, ln_factorial, ln_rational,
    parse_rational, rational_from_f64, rational_interval, rational_pow,
};

/// Tri-state outcome used by every checker in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Combine verdicts of independent sub-checks: any violation wins, then
    /// any inconclusive, else holds.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Holds,
        }
    }

    pub fn all<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        it.into_iter().fold(Verdict::Holds, Verdict::and)
    }
}
