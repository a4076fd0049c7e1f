//! A rank-driven point process on the unit interval.
//!
//! Each step adds a uniform point `u`; if some particle lies strictly left of
//! `u`, the leftmost particle is removed. Arrivals left of
//! `p_c = 1 - e^{-1}` are eventually removed, arrivals right of it eventually
//! stay forever.
//!
//! The crate provides
//! - [`engine`]: step semantics of the full chain and of its restriction to
//!   `[0, q]`, with a run driver and observers,
//! - [`excursion`]: return times to the empty state, increment-symbol
//!   densities and regenerative stationary sampling,
//! - [`oracle`]: the exact return-time distribution as rational polynomials
//!   in `q`,
//! - [`coupling`]: randomized checks of the pathwise comparisons between
//!   chains driven by one stream,
//! - [`criticality`]: survival, critical-point bisection, growth bound and
//!   tail-exponent fitting,
//! - [`cli`]: the `canyon` command line front end.
//!
//! All estimators are deterministic functions of their seed and parameters;
//! replica `i` of seed `s` always draws from the same stream, whatever the
//! thread count.

pub mod cli;
pub mod coupling;
pub mod criticality;
pub mod engine;
mod error;
pub mod excursion;
pub mod oracle;
pub mod position;
mod rng;
pub mod stats;

pub use engine::{
    sample_restricted_arrival, step_full, step_restricted, FullConfig, RestrictedArrival,
    RestrictedConfig, StepOutcome,
};
pub use error::{Error, Result};
pub use position::{from_exp, to_exp, ExpPos, UnitPos, P_C, T_C};
pub use rng::{RngStream, ALGORITHM as RNG_ALGORITHM};
