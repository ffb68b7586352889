//! Nonnegative extended reals, `[0, +∞]`.
//!
//! Costs and value functions live here. Arithmetic follows the conventions of
//! nonnegative integration: `a + ∞ = ∞`, `λ·∞ = ∞` for `λ > 0` and `0·∞ = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[0, +∞]`. Never NaN, never negative.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct ExtNonnegReal(f64);

impl ExtNonnegReal {
    pub const ZERO: Self = Self(0.0);
    pub const ONE: Self = Self(1.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    /// Accepts finite nonnegative numbers and `+∞`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidScalar(value));
        }
        // -0.0 normalises to +0.0 so that bitwise comparisons agree.
        Ok(Self(value + 0.0))
    }

    /// Panics on values outside `[0, +∞]`; for literals and internal use.
    pub fn finite(value: f64) -> Self {
        Self::new(value).unwrap_or_else(|_| panic!("{value} is not a nonnegative extended real"))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `Some(x)` for finite values.
    pub fn to_finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// `λ·self` with `λ ≥ 0` and `0·∞ = 0`.
    pub fn scale(self, lambda: f64) -> Self {
        debug_assert!(lambda >= 0.0);
        if lambda == 0.0 {
            Self::ZERO
        } else {
            Self(lambda * self.0)
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Eq for ExtNonnegReal {}

impl PartialOrd for ExtNonnegReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNonnegReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // No NaN by construction.
        self.0.partial_cmp(&other.0).expect("NaN in ExtNonnegReal")
    }
}

impl Add for ExtNonnegReal {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for ExtNonnegReal {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sum for ExtNonnegReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl From<ExtNonnegReal> for f64 {
    fn from(v: ExtNonnegReal) -> f64 {
        v.0
    }
}

impl TryFrom<f64> for ExtNonnegReal {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl fmt::Debug for ExtNonnegReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtNonnegReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl FromStr for ExtNonnegReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "Infinity" => Ok(Self::INFINITY),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a number: {t:?}")))
                .and_then(Self::new),
        }
    }
}

/// Finite values serialize as numbers, `+∞` as the string `"inf"`.
impl Serialize for ExtNonnegReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtNonnegReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        let value = match Repr::deserialize(deserializer)? {
            Repr::Num(x) => Self::new(x),
            Repr::Str(s) => s.parse(),
        };
        value.map_err(serde::de::Error::custom)
    }
}
