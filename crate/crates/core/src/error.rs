use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its allowed range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("inside arrival at {pos} lies above the cutoff {cutoff}")]
    InsideAboveCutoff { pos: f64, cutoff: f64 },

    #[error("range [{lo}, {hi}] is empty (lower end exceeds upper end)")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("threshold count jumped from {prev} to {now}; increments larger than one are impossible")]
    CorruptedStream { prev: u64, now: u64 },

    #[error("exact enumeration up to kmax = {kmax} exceeds the cost limit of {limit}")]
    CostLimit { kmax: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cycle {cycle} did not return to the empty state within {horizon} steps")]
    Censored { cycle: u64, horizon: u64 },

    #[error("critical-point bracket [{lo}, {hi}] does not straddle the transition ({lo_class} at lo, {hi_class} at hi)")]
    BracketNotStraddling {
        lo: f64,
        hi: f64,
        lo_class: &'static str,
        hi_class: &'static str,
    },

    #[error("allocation of {requested} more particles failed")]
    OutOfMemory { requested: usize },
}

impl Error {
    /// True for errors caused by caller input rather than by the run itself.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange { .. }
                | Error::InsideAboveCutoff { .. }
                | Error::InvalidRange { .. }
                | Error::CostLimit { .. }
                | Error::Precondition(_)
        )
    }

    /// True for failures of a statistical guard (censoring, inconclusive bracket).
    pub fn is_statistical_guard(&self) -> bool {
        matches!(self, Error::Censored { .. } | Error::BracketNotStraddling { .. })
    }
}
