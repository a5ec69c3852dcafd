//! Fixed-point simulation time.
//!
//! All timestamps and durations are integer counts of nanounits (1e-9 of a
//! simulation time unit). Differences between timestamps are therefore exact,
//! and every value prints and parses back without loss at nine fractional
//! digits.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Ticks in one simulation time unit.
pub const TICKS_PER_UNIT: u64 = 1_000_000_000;

/// A point in simulation time, or a non-negative duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_ticks(ticks: u64) -> Self {
        SimTime(ticks)
    }

    pub const fn ticks(self) -> u64 {
        self.0
    }

    /// Whole units, exactly.
    pub const fn from_whole_units(units: u64) -> Self {
        SimTime(units * TICKS_PER_UNIT)
    }

    /// Rounds a real number of time units to the nearest tick.
    ///
    /// Returns `None` for negative, non-finite or out-of-range values.
    pub fn try_from_units(units: f64) -> Option<Self> {
        if !units.is_finite() || units < 0.0 {
            return None;
        }
        let ticks = (units * TICKS_PER_UNIT as f64).round();
        if ticks >= u64::MAX as f64 {
            return None;
        }
        Some(SimTime(ticks as u64))
    }

    /// Like [`SimTime::try_from_units`] but panics on invalid input.
    pub fn from_units(units: f64) -> Self {
        Self::try_from_units(units)
            .unwrap_or_else(|| panic!("invalid simulation time value {units}"))
    }

    pub fn as_units(self) -> f64 {
        let whole = (self.0 / TICKS_PER_UNIT) as f64;
        let frac = (self.0 % TICKS_PER_UNIT) as f64 / TICKS_PER_UNIT as f64;
        whole + frac
    }

    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_add(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_add(rhs.0).map(SimTime)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_add(rhs.0).expect("simulation time overflow"))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(
            self.0
                .checked_sub(rhs.0)
                .expect("negative simulation time difference"),
        )
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:09}",
            self.0 / TICKS_PER_UNIT,
            self.0 % TICKS_PER_UNIT
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid time literal {0:?}")]
pub struct ParseTimeError(String);

impl FromStr for SimTime {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ParseTimeError(s.to_string());
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let plain = !whole.is_empty()
            && whole.bytes().all(|b| b.is_ascii_digit())
            && frac.bytes().all(|b| b.is_ascii_digit())
            && frac.len() <= 9;
        if plain {
            let whole: u64 = whole.parse().map_err(|_| err())?;
            let mut frac_ticks = 0u64;
            for (i, b) in frac.bytes().enumerate() {
                frac_ticks += u64::from(b - b'0') * 10u64.pow(8 - i as u32);
            }
            return whole
                .checked_mul(TICKS_PER_UNIT)
                .and_then(|t| t.checked_add(frac_ticks))
                .map(SimTime)
                .ok_or_else(err);
        }
        // Exponent forms and over-long fractions go through f64 rounding.
        let value: f64 = s.parse().map_err(|_| err())?;
        SimTime::try_from_units(value).ok_or_else(err)
    }
}

impl Serialize for SimTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct SimTimeVisitor;

impl Visitor<'_> for SimTimeVisitor {
    type Value = SimTime;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a non-negative time as a decimal string or number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<SimTime, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<SimTime, E> {
        v.checked_mul(TICKS_PER_UNIT)
            .map(SimTime)
            .ok_or_else(|| E::custom(format!("time {v} out of range")))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<SimTime, E> {
        u64::try_from(v)
            .map_err(|_| E::custom(format!("negative time {v}")))
            .and_then(|v| self.visit_u64(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<SimTime, E> {
        SimTime::try_from_units(v).ok_or_else(|| E::custom(format!("invalid time {v}")))
    }
}

impl<'de> Deserialize<'de> for SimTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(SimTimeVisitor)
    }
}
