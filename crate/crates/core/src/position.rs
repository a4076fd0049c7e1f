//! Particle positions in uniform and exponential coordinates.
//!
//! The chain only looks at the relative order of particles, so any atomless
//! law gives the same process up to a monotone change of variables. The
//! simulation runs on `[0, 1)`; the exponential view `t = -ln(1 - q)` is where
//! the closed-form laws are simplest (the critical point sits at `t = 1`).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The critical point `1 - e^{-1}` in uniform coordinates.
pub const P_C: f64 = 0.632_120_558_828_557_7;

/// The critical point in exponential coordinates.
pub const T_C: f64 = 1.0;

/// A position in the unit interval, `0 <= value < 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UnitPos(f64);

impl UnitPos {
    pub const ZERO: UnitPos = UnitPos(0.0);

    pub fn new(value: f64) -> Result<Self> {
        // `!(value >= 0.0)` also rejects NaN.
        if !(value >= 0.0) || value >= 1.0 {
            return Err(Error::OutOfRange {
                what: "position",
                value,
                range: "[0, 1)",
            });
        }
        // Normalise -0.0 so that bit patterns order like the numbers.
        Ok(UnitPos(value + 0.0))
    }

    /// Builds a position from the top 53 bits of a random word.
    #[inline]
    pub fn from_bits53(word: u64) -> Self {
        UnitPos((word >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Order-preserving integer key. Non-negative finite floats sort like
    /// their IEEE-754 bit patterns.
    #[inline]
    pub(crate) fn key(self) -> u64 {
        self.0.to_bits()
    }

    #[inline]
    pub(crate) fn from_key(key: u64) -> Self {
        UnitPos(f64::from_bits(key))
    }

    pub fn to_exp(self) -> ExpPos {
        ExpPos(-(-self.0).ln_1p())
    }
}

impl Eq for UnitPos {}

impl Ord for UnitPos {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl TryFrom<f64> for UnitPos {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        UnitPos::new(value)
    }
}

impl From<UnitPos> for f64 {
    fn from(p: UnitPos) -> f64 {
        p.0
    }
}

impl fmt::Display for UnitPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A position on the half line in exponential coordinates, `value >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExpPos(f64);

impl ExpPos {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) || value.is_infinite() {
            return Err(Error::OutOfRange {
                what: "exponential position",
                value,
                range: "[0, inf)",
            });
        }
        Ok(ExpPos(value + 0.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_unit(self) -> UnitPos {
        // 1 - e^{-t} rounds to 1.0 for t beyond ~37; clamp to the largest
        // float below one so the result stays a valid position.
        let q = -(-self.0).exp_m1();
        UnitPos(q.min(1.0 - f64::EPSILON / 2.0))
    }
}

impl TryFrom<f64> for ExpPos {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        ExpPos::new(value)
    }
}

impl From<ExpPos> for f64 {
    fn from(p: ExpPos) -> f64 {
        p.0
    }
}

/// `t = -ln(1 - q)`. Fails for `q = 1`, whose image is infinite.
pub fn to_exp(q: f64) -> Result<ExpPos> {
    if q == 1.0 {
        return Err(Error::OutOfRange {
            what: "q (maps to +inf in exponential coordinates)",
            value: q,
            range: "[0, 1)",
        });
    }
    Ok(UnitPos::new(q)?.to_exp())
}

/// `q = 1 - e^{-t}`.
pub fn from_exp(t: f64) -> Result<UnitPos> {
    Ok(ExpPos::new(t)?.to_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_constant_matches_its_definition() {
        assert_eq!(P_C, 1.0 - (-1.0f64).exp());
        assert!((to_exp(P_C).unwrap().value() - T_C).abs() < 1e-15);
    }

    #[test]
    fn coordinate_examples() {
        assert_eq!(to_exp(0.0).unwrap().value(), 0.0);
        assert!((to_exp(0.5).unwrap().value() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((to_exp(1.0 - (-1.0f64).exp()).unwrap().value() - 1.0).abs() < 1e-15);
        assert!(matches!(to_exp(1.0), Err(Error::OutOfRange { .. })));
        assert!(from_exp(-0.1).is_err());
    }

    #[test]
    fn round_trip_on_dense_grid() {
        let n = 200_000;
        for i in 0..n {
            let q = i as f64 / n as f64 * 0.999_999;
            let back = to_exp(q).unwrap().to_unit().value();
            assert!((back - q).abs() < 1e-12, "q = {q}, back = {back}");
        }
    }

    #[test]
    fn rejects_out_of_range_positions() {
        assert!(UnitPos::new(1.0).is_err());
        assert!(UnitPos::new(-1e-300).is_err());
        assert!(UnitPos::new(f64::NAN).is_err());
        assert_eq!(UnitPos::new(-0.0).unwrap().key(), 0);
    }

    #[test]
    fn key_order_matches_numeric_order() {
        let xs = [0.0, 1e-300, 0.1, 0.1 + 1e-17, 0.5, 0.999_999_999];
        for w in xs.windows(2) {
            let a = UnitPos::new(w[0]).unwrap();
            let b = UnitPos::new(w[1]).unwrap();
            assert_eq!(a.key() <= b.key(), w[0] <= w[1]);
        }
    }

    #[test]
    fn from_bits53_stays_in_unit_interval() {
        assert_eq!(UnitPos::from_bits53(0).value(), 0.0);
        assert!(UnitPos::from_bits53(u64::MAX).value() < 1.0);
    }
}
