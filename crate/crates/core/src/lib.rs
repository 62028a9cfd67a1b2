//! Weight-sequence analytics, exact series algebra for Joris identities, and
//! numerical checks of the accompanying quantitative lemmas.

pub mod exact;
pub mod joris_numeric;
pub mod series_algebra;
pub mod weight_core;
