//! Driving either chain over `k = 1..=steps` and reporting to observers.

use serde::Serialize;

use crate::engine::{FullConfig, RestrictedArrival, RestrictedConfig, StepOutcome};
use crate::error::{Error, Result};
use crate::position::UnitPos;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub enum RunMode {
    /// Full chain started empty. Non-empty `thresholds` turn on the
    /// threshold-count index.
    Full { thresholds: Vec<UnitPos> },
    /// Chain restricted to `[0, cutoff]`, started empty.
    Restricted { cutoff: UnitPos },
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    pub seed: u64,
    pub replica: u64,
    pub steps: u64,
    pub mode: RunMode,
    /// Observers see steps `k` with `k % stride == 0`.
    pub stride: u64,
}

impl RunSpec {
    pub fn full(seed: u64, steps: u64) -> Self {
        RunSpec {
            seed,
            replica: 0,
            steps,
            mode: RunMode::Full { thresholds: Vec::new() },
            stride: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord<'a> {
    pub k: u64,
    pub outcome: StepOutcome,
    /// Minimum after the step, with the empty-set sentinel of the mode
    /// (`1` for the full chain, the cutoff for the restricted one).
    pub minimum: f64,
    pub size: usize,
    /// Counts at the configured thresholds (full mode), else empty.
    pub counts: &'a [u64],
}

pub trait Observer {
    fn observe(&mut self, record: &StepRecord<'_>);
}

impl<F: FnMut(&StepRecord<'_>)> Observer for F {
    fn observe(&mut self, record: &StepRecord<'_>) {
        self(record)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub final_size: usize,
    pub final_minimum: f64,
    pub added: u64,
    pub displaced: u64,
    pub removed_min: u64,
    pub noop: u64,
}

#[derive(Default)]
struct Tally {
    added: u64,
    displaced: u64,
    removed_min: u64,
    noop: u64,
}

impl Tally {
    #[inline]
    fn record(&mut self, o: &StepOutcome) {
        match o {
            StepOutcome::Added => self.added += 1,
            StepOutcome::Displaced(_) => self.displaced += 1,
            StepOutcome::RemovedMin(_) => self.removed_min += 1,
            StepOutcome::Noop => self.noop += 1,
        }
    }
}

/// Runs the chain selected by `spec` from the empty state, drawing from
/// `RngStream::new(spec.seed, spec.replica)`.
pub fn run(spec: &RunSpec, observers: &mut [&mut dyn Observer]) -> Result<RunSummary> {
    if spec.stride == 0 {
        return Err(Error::Precondition("stride must be at least 1".into()));
    }
    let mut rng = RngStream::new(spec.seed, spec.replica);
    let mut tally = Tally::default();
    let watching = !observers.is_empty();
    let mut counts = Vec::new();

    match &spec.mode {
        RunMode::Full { thresholds } => {
            let mut cfg = if thresholds.is_empty() {
                FullConfig::new()
            } else {
                FullConfig::with_thresholds(thresholds.clone())
            };
            for k in 1..=spec.steps {
                let outcome = cfg.try_step(rng.uniform())?;
                tally.record(&outcome);
                if watching && k % spec.stride == 0 {
                    if let Some(idx) = cfg.thresholds() {
                        idx.counts_into(&mut counts);
                    }
                    let rec = StepRecord {
                        k,
                        outcome,
                        minimum: cfg.minimum(),
                        size: cfg.len(),
                        counts: &counts,
                    };
                    for o in observers.iter_mut() {
                        o.observe(&rec);
                    }
                }
            }
            Ok(tally.finish(spec.steps, cfg.len(), cfg.minimum()))
        }
        RunMode::Restricted { cutoff } => {
            let mut cfg = RestrictedConfig::new(*cutoff);
            for k in 1..=spec.steps {
                let outcome = cfg.apply(RestrictedArrival::from_uniform(rng.uniform(), *cutoff));
                tally.record(&outcome);
                if watching && k % spec.stride == 0 {
                    let rec = StepRecord {
                        k,
                        outcome,
                        minimum: cfg.minimum(),
                        size: cfg.len(),
                        counts: &counts,
                    };
                    for o in observers.iter_mut() {
                        o.observe(&rec);
                    }
                }
            }
            Ok(tally.finish(spec.steps, cfg.len(), cfg.minimum()))
        }
    }
}

impl Tally {
    fn finish(self, steps: u64, final_size: usize, final_minimum: f64) -> RunSummary {
        RunSummary {
            steps,
            final_size,
            final_minimum,
            added: self.added,
            displaced: self.displaced,
            removed_min: self.removed_min,
            noop: self.noop,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_emit_nothing() {
        let mut seen = 0;
        let mut obs = |_: &StepRecord<'_>| seen += 1;
        let s = run(&RunSpec::full(1, 0), &mut [&mut obs]).unwrap();
        assert_eq!(seen, 0);
        assert_eq!(s.final_size, 0);
        assert_eq!(s.final_minimum, 1.0);
    }

    #[test]
    fn stride_thins_records() {
        let mut ks = Vec::new();
        let mut obs = |r: &StepRecord<'_>| ks.push(r.k);
        let spec = RunSpec { stride: 4, ..RunSpec::full(3, 10) };
        run(&spec, &mut [&mut obs]).unwrap();
        assert_eq!(ks, vec![4, 8]);
        assert!(run(&RunSpec { stride: 0, ..RunSpec::full(3, 10) }, &mut []).is_err());
    }

    #[test]
    fn full_run_replays_the_stream() {
        let mut rng = RngStream::new(9, 0);
        let mut cfg = FullConfig::new();
        let mut expect = Vec::new();
        for _ in 0..500 {
            let o = cfg.step(rng.uniform());
            expect.push((o, cfg.len()));
        }
        let mut got = Vec::new();
        let mut obs = |r: &StepRecord<'_>| got.push((r.outcome, r.size));
        run(&RunSpec::full(9, 500), &mut [&mut obs]).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn full_size_changes_by_zero_or_one() {
        let mut prev = 0usize;
        let mut obs = |r: &StepRecord<'_>| {
            assert!(r.size == prev || r.size == prev + 1);
            assert_eq!(r.size as i64 - prev as i64, r.outcome.size_delta());
            prev = r.size;
        };
        run(&RunSpec::full(5, 20_000), &mut [&mut obs]).unwrap();
    }

    #[test]
    fn restricted_size_changes_by_at_most_one() {
        let q = UnitPos::new(0.6).unwrap();
        let mut prev = 0i64;
        let mut obs = |r: &StepRecord<'_>| {
            let d = r.size as i64 - prev;
            assert!((-1..=1).contains(&d));
            assert_eq!(d, r.outcome.size_delta());
            prev = r.size as i64;
        };
        let spec = RunSpec {
            mode: RunMode::Restricted { cutoff: q },
            ..RunSpec::full(5, 20_000)
        };
        run(&spec, &mut [&mut obs]).unwrap();
    }
}
