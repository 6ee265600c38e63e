//! Exact point arithmetic.
//!
//! Every quantity in the game is a multiple of one tenth of a point: contributions and
//! endowments are whole points and the multiplier carries one decimal digit. Storing
//! tenths as integers keeps 20-round accumulations exact and replays bit-identical.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A score in tenths of a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Points(i64);

impl Points {
    pub const ZERO: Points = Points(0);

    pub const fn from_tenths(tenths: i64) -> Self {
        Points(tenths)
    }

    pub const fn whole(points: i64) -> Self {
        Points(points * 10)
    }

    pub const fn tenths(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }

    /// Converts a decimal value, failing unless it sits on the tenths grid.
    pub fn from_decimal(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let scaled = value * 10.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 || rounded.abs() > 9.0e15 {
            return None;
        }
        Some(Points(rounded as i64))
    }
}

impl fmt::Display for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{}", abs / 10, abs % 10)
    }
}

impl Add for Points {
    type Output = Points;
    fn add(self, rhs: Points) -> Points {
        Points(self.0 + rhs.0)
    }
}

impl AddAssign for Points {
    fn add_assign(&mut self, rhs: Points) {
        self.0 += rhs.0;
    }
}

impl Sub for Points {
    type Output = Points;
    fn sub(self, rhs: Points) -> Points {
        Points(self.0 - rhs.0)
    }
}

impl Neg for Points {
    type Output = Points;
    fn neg(self) -> Points {
        Points(-self.0)
    }
}

impl Sum for Points {
    fn sum<I: Iterator<Item = Points>>(iter: I) -> Points {
        iter.fold(Points::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Points> for Points {
    fn sum<I: Iterator<Item = &'a Points>>(iter: I) -> Points {
        iter.copied().sum()
    }
}

impl Serialize for Points {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Points {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Points::from_decimal(value)
            .ok_or_else(|| serde::de::Error::custom(format!("{value} is not a multiple of 0.1")))
    }
}

/// Pool multiplier with one decimal digit, stored in tenths (1.6 is `Multiplier(16)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiplier(u32);

impl Multiplier {
    pub const fn from_tenths(tenths: u32) -> Self {
        Multiplier(tenths)
    }

    pub const fn tenths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }

    pub fn from_decimal(value: f64) -> Option<Self> {
        let points = Points::from_decimal(value)?;
        u32::try_from(points.tenths()).ok().map(Multiplier)
    }
}

impl Default for Multiplier {
    fn default() -> Self {
        Multiplier(16)
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl FromStr for Multiplier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("invalid multiplier {s:?}"))?;
        Multiplier::from_decimal(value)
            .ok_or_else(|| format!("multiplier {s:?} must be a non-negative multiple of 0.1"))
    }
}

impl Serialize for Multiplier {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Multiplier {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Multiplier::from_decimal(value)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid multiplier {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_uses_one_decimal() {
        assert_eq!(Points::from_tenths(160).to_string(), "16.0");
        assert_eq!(Points::from_tenths(114).to_string(), "11.4");
        assert_eq!(Points::from_tenths(-22).to_string(), "-2.2");
        assert_eq!(Multiplier::default().to_string(), "1.6");
    }

    #[test]
    fn decimal_conversion_rejects_off_grid_values() {
        assert_eq!(Points::from_decimal(13.4), Some(Points::from_tenths(134)));
        assert_eq!(Points::from_decimal(13.45), None);
        assert_eq!(Points::from_decimal(f64::NAN), None);
        assert_eq!("1.6".parse::<Multiplier>(), Ok(Multiplier::from_tenths(16)));
        assert!("1.65".parse::<Multiplier>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Points::from_tenths(3201);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "320.1");
        assert_eq!(serde_json::from_str::<Points>(&s).unwrap(), p);
    }
}
