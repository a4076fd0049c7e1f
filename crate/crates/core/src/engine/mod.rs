//! Step semantics of the full chain and of its restriction to `[0, q]`.
//!
//! Full chain: add the arrival `u`; if `u` lies strictly right of the current
//! minimum, remove that minimum. Restricted chain: particles right of the
//! cutoff are never stored, an arrival right of the cutoff just removes the
//! minimum (if any).
//!
//! Ties have probability zero; equality takes the add-only branch.

mod fenwick;
mod full;
mod queue;
mod restricted;
mod run;

use serde::Serialize;

pub use fenwick::ThresholdIndex;
pub use full::FullConfig;
pub use restricted::{RestrictedArrival, RestrictedConfig};
pub use run::{run, Observer, RunMode, RunSpec, RunSummary, StepRecord};

use crate::position::UnitPos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "removed")]
pub enum StepOutcome {
    /// The arrival was stored and nothing was removed.
    Added,
    /// The arrival was stored and the previous minimum removed.
    Displaced(UnitPos),
    /// Restricted chain only: an outside arrival removed the minimum.
    RemovedMin(UnitPos),
    /// Restricted chain only: an outside arrival met an empty set.
    Noop,
}

impl StepOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            StepOutcome::Added => "added",
            StepOutcome::Displaced(_) => "displaced",
            StepOutcome::RemovedMin(_) => "removed_min",
            StepOutcome::Noop => "noop",
        }
    }

    pub fn removed(&self) -> Option<UnitPos> {
        match *self {
            StepOutcome::Displaced(p) | StepOutcome::RemovedMin(p) => Some(p),
            _ => None,
        }
    }

    /// Change in the number of stored particles.
    pub fn size_delta(&self) -> i64 {
        match self {
            StepOutcome::Added => 1,
            StepOutcome::Displaced(_) | StepOutcome::Noop => 0,
            StepOutcome::RemovedMin(_) => -1,
        }
    }
}

/// One full-chain step on `cfg` with arrival `u`.
pub fn step_full(cfg: &mut FullConfig, u: UnitPos) -> StepOutcome {
    cfg.step(u)
}

/// One restricted-chain step.
pub fn step_restricted(
    cfg: &mut RestrictedConfig,
    arrival: RestrictedArrival,
) -> crate::Result<StepOutcome> {
    cfg.step(arrival)
}

/// Draws one restricted arrival: outside with probability `1 - q`, otherwise
/// inside at a uniform position in `[0, q)`.
///
/// Both cases come from a single uniform `u`: inside iff `u < q`, at `u`
/// itself. Chains at different cutoffs driven by the same stream are
/// therefore the restrictions of one full chain.
#[inline]
pub fn sample_restricted_arrival(rng: &mut crate::RngStream, q: UnitPos) -> RestrictedArrival {
    RestrictedArrival::from_uniform(rng.uniform(), q)
}
