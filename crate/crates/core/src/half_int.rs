//! Exact half-integer quantum numbers.
//!
//! Spin and magnetic quantum numbers are stored as twice their value, so
//! `l = 17/2` is `HalfInt(17)` and selection rules stay in integer arithmetic.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized as its numeric value (`8`, `8.5`), not as twice the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct HalfInt(i32);

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = String;

    fn try_from(x: f64) -> std::result::Result<Self, String> {
        HalfInt::from_f64(x).ok_or_else(|| format!("{x} is not a multiple of 1/2"))
    }
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// Parses a real number that must be an exact multiple of 1/2.
    pub fn from_f64(x: f64) -> Option<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > i32::MAX as f64 {
            return None;
        }
        Some(HalfInt(twice.round() as i32))
    }

    /// A spin quantum number `l ≥ 0`.
    pub fn spin(twice: i32) -> Result<Self> {
        if twice < 0 {
            return Err(Error::InvalidSpin(twice));
        }
        Ok(HalfInt(twice))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Multiplet dimension `2l + 1`.
    pub fn dim(self) -> usize {
        debug_assert!(self.0 >= 0);
        (self.0 + 1) as usize
    }

    /// `l(l+1)`.
    pub fn casimir(self) -> f64 {
        let l = self.value();
        l * (l + 1.0)
    }

    /// Magnetic quantum numbers `-l, -l+1, ..., l` in ascending order.
    pub fn magnetic_values(self) -> impl DoubleEndedIterator<Item = HalfInt> + ExactSizeIterator {
        let l = self.0;
        let n = if l >= 0 { l as usize + 1 } else { 0 };
        (0..n).map(move |k| HalfInt(-l + 2 * k as i32))
    }

    /// Whether `m` belongs to the multiplet of spin `self`.
    pub fn contains(self, m: HalfInt) -> bool {
        m.0.abs() <= self.0 && (self.0 - m.0) % 2 == 0
    }

    /// Basis index of `m` in the ascending-m ordering (m = -l first).
    pub fn index_of(self, m: HalfInt) -> Result<usize> {
        if !self.contains(m) {
            return Err(Error::InvalidMagnetic { l: self, m });
        }
        Ok(((m.0 + self.0) / 2) as usize)
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}
