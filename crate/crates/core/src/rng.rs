//! Replica-addressable random streams.
//!
//! Every stream is xoshiro256++ seeded through SplitMix64 from
//! `master_seed ^ replica`. The algorithm is frozen: golden fixtures depend
//! on the exact draw sequence.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::position::UnitPos;

pub const ALGORITHM: &str = "xoshiro256++ (SplitMix64-seeded from seed ^ replica)";

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    replica: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64, replica: u64) -> Self {
        RngStream {
            seed,
            replica,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed ^ replica),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> UnitPos {
        UnitPos::from_bits53(self.inner.next_u64())
    }

    /// Uniform index in `0..n` (Lemire's multiply-shift, with rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.inner.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}
