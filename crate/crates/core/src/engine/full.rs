use crate::engine::fenwick::ThresholdIndex;
use crate::engine::queue::BucketQueue;
use crate::engine::StepOutcome;
use crate::error::{Error, Result};
use crate::position::{ExpPos, UnitPos};

/// State of the full chain: a finite multiset of positions in `[0, 1)`.
#[derive(Clone, Debug)]
pub struct FullConfig {
    particles: BucketQueue,
    index: Option<ThresholdIndex>,
}

impl Default for FullConfig {
    fn default() -> Self {
        Self::new()
    }
}

impl FullConfig {
    pub fn new() -> Self {
        FullConfig {
            particles: BucketQueue::new(),
            index: None,
        }
    }

    /// Empty configuration that also maintains counts at `thresholds`.
    pub fn with_thresholds(thresholds: Vec<UnitPos>) -> Self {
        FullConfig {
            particles: BucketQueue::new(),
            index: Some(ThresholdIndex::new(thresholds)),
        }
    }

    pub fn from_positions<I: IntoIterator<Item = UnitPos>>(positions: I) -> Self {
        let mut cfg = Self::new();
        for p in positions {
            cfg.insert(p);
        }
        cfg
    }

    /// Replaces the particles with `positions`, reusing the storage.
    pub(crate) fn reset<I: IntoIterator<Item = UnitPos>>(&mut self, positions: I) {
        self.particles.clear();
        if let Some(idx) = &mut self.index {
            *idx = ThresholdIndex::new(idx.thresholds().to_vec());
        }
        for p in positions {
            self.insert(p);
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.len() == 0
    }

    pub fn peek_min(&self) -> Option<UnitPos> {
        self.particles.peek_min()
    }

    /// Least particle, or the sentinel `1.0` when empty.
    pub fn minimum(&self) -> f64 {
        self.peek_min().map_or(1.0, UnitPos::value)
    }

    /// Minimum in exponential coordinates; `None` marks the empty set.
    pub fn minimum_exp(&self) -> Option<ExpPos> {
        self.peek_min().map(UnitPos::to_exp)
    }

    pub fn thresholds(&self) -> Option<&ThresholdIndex> {
        self.index.as_ref()
    }

    #[inline]
    fn insert(&mut self, p: UnitPos) {
        self.particles.push(p);
        if let Some(idx) = &mut self.index {
            idx.insert(p);
        }
    }

    #[inline]
    fn pop_min(&mut self) -> Option<UnitPos> {
        let m = self.particles.pop_min()?;
        if let Some(idx) = &mut self.index {
            idx.remove(m);
        }
        Some(m)
    }

    /// Adds `u`; if `u` is strictly right of the current minimum, that
    /// minimum is removed.
    #[inline]
    pub fn step(&mut self, u: UnitPos) -> StepOutcome {
        match self.peek_min() {
            Some(m) if m < u => {
                self.insert(u);
                let removed = self.pop_min();
                debug_assert_eq!(removed, Some(m));
                StepOutcome::Displaced(m)
            }
            _ => {
                self.insert(u);
                StepOutcome::Added
            }
        }
    }

    /// As [`FullConfig::step`], but reports allocation failure.
    #[inline]
    pub fn try_step(&mut self, u: UnitPos) -> Result<StepOutcome> {
        self.particles.try_reserve_for(u)?;
        Ok(self.step(u))
    }

    /// Number of particles `p` with `s <= p <= q`.
    pub fn count_in_range(&self, s: UnitPos, q: UnitPos) -> Result<usize> {
        if s > q {
            return Err(Error::InvalidRange {
                lo: s.value(),
                hi: q.value(),
            });
        }
        Ok(self.particles.count_between(s, q))
    }

    /// Particles in increasing order.
    pub fn sorted(&self) -> Vec<UnitPos> {
        let mut v: Vec<UnitPos> = self.particles.iter().collect();
        v.sort();
        v
    }

    /// The particles strictly below `q`, as a restricted configuration.
    pub fn restrict(&self, q: UnitPos) -> crate::engine::RestrictedConfig {
        crate::engine::RestrictedConfig::from_positions(
            q,
            self.particles.iter().filter(|p| *p < q),
        )
        .expect("filtered positions lie below the cutoff")
    }
}
