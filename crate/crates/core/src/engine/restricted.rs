use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::engine::StepOutcome;
use crate::error::{Error, Result};
use crate::position::{ExpPos, UnitPos};

/// One step's input to the restricted chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RestrictedArrival {
    Inside(UnitPos),
    Outside,
}

impl RestrictedArrival {
    /// The restriction of a full-chain arrival `u` to cutoff `q`.
    #[inline]
    pub fn from_uniform(u: UnitPos, q: UnitPos) -> Self {
        if u < q {
            RestrictedArrival::Inside(u)
        } else {
            RestrictedArrival::Outside
        }
    }
}

/// The chain restricted to `[0, q]`. Only particles at or below the cutoff
/// are stored; memory is proportional to the current excursion.
#[derive(Clone, Debug)]
pub struct RestrictedConfig {
    cutoff: UnitPos,
    particles: BinaryHeap<Reverse<u64>>,
}

impl RestrictedConfig {
    pub fn new(cutoff: UnitPos) -> Self {
        RestrictedConfig {
            cutoff,
            particles: BinaryHeap::new(),
        }
    }

    pub fn from_positions<I: IntoIterator<Item = UnitPos>>(cutoff: UnitPos, positions: I) -> Result<Self> {
        let mut cfg = Self::new(cutoff);
        for p in positions {
            cfg.check_inside(p)?;
            cfg.particles.push(Reverse(p.key()));
        }
        Ok(cfg)
    }

    pub fn cutoff(&self) -> UnitPos {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub(crate) fn clear(&mut self) {
        self.particles.clear();
    }

    pub fn peek_min(&self) -> Option<UnitPos> {
        self.particles.peek().map(|Reverse(k)| UnitPos::from_key(*k))
    }

    /// Least particle, or the cutoff when empty.
    pub fn minimum(&self) -> f64 {
        self.peek_min().unwrap_or(self.cutoff).value()
    }

    /// Minimum in exponential coordinates; `None` marks the empty set.
    pub fn minimum_exp(&self) -> Option<ExpPos> {
        self.peek_min().map(UnitPos::to_exp)
    }

    fn check_inside(&self, p: UnitPos) -> Result<()> {
        if p > self.cutoff {
            return Err(Error::InsideAboveCutoff {
                pos: p.value(),
                cutoff: self.cutoff.value(),
            });
        }
        Ok(())
    }

    pub fn step(&mut self, arrival: RestrictedArrival) -> Result<StepOutcome> {
        if let RestrictedArrival::Inside(p) = arrival {
            self.check_inside(p)?;
        }
        Ok(self.apply(arrival))
    }

    /// Step for arrivals already known to respect the cutoff.
    #[inline]
    pub(crate) fn apply(&mut self, arrival: RestrictedArrival) -> StepOutcome {
        match arrival {
            RestrictedArrival::Inside(p) => match self.particles.peek() {
                Some(&Reverse(m)) if m < p.key() => {
                    let mut top = self.particles.peek_mut().expect("non-empty");
                    *top = Reverse(p.key());
                    drop(top);
                    StepOutcome::Displaced(UnitPos::from_key(m))
                }
                _ => {
                    self.particles.push(Reverse(p.key()));
                    StepOutcome::Added
                }
            },
            RestrictedArrival::Outside => match self.particles.pop() {
                Some(Reverse(m)) => StepOutcome::RemovedMin(UnitPos::from_key(m)),
                None => StepOutcome::Noop,
            },
        }
    }

    /// Number of particles `p` with `s <= p <= q`.
    pub fn count_in_range(&self, s: UnitPos, q: UnitPos) -> Result<usize> {
        if s > q {
            return Err(Error::InvalidRange {
                lo: s.value(),
                hi: q.value(),
            });
        }
        let (ks, kq) = (s.key(), q.key());
        Ok(self
            .particles
            .iter()
            .filter(|Reverse(k)| *k >= ks && *k <= kq)
            .count())
    }

    /// Particles in increasing order.
    pub fn sorted(&self) -> Vec<UnitPos> {
        let mut v = Vec::with_capacity(self.len());
        self.sorted_into(&mut v);
        v
    }

    pub(crate) fn sorted_into(&self, out: &mut Vec<UnitPos>) {
        out.clear();
        out.extend(self.particles.iter().map(|Reverse(k)| UnitPos::from_key(*k)));
        out.sort_unstable();
    }
}
