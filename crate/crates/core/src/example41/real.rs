//! Scalar abstraction for the counterexample formulas.
//!
//! The parameter recursion pushes discount factors towards 1 while branch
//! lengths grow into the thousands, so expressions like `(1 - α^N)²/(1 - α)`
//! cancel badly in double precision. Everything here is generic over [`Real`];
//! [`Extended`] (128-bit mantissa, ≈ 38 significant digits) is the default and
//! `f64` is kept for comparison.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Slack added before taking a floor, so that a quotient sitting exactly
    /// on an integer is not pushed below it by rounding.
    const FLOOR_GUARD: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn powu(&self, n: u64) -> Self;
    fn floor_u64(&self) -> Option<u64>;

    fn from_u64(n: u64) -> Self {
        Self::from_f64(n as f64)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    /// `self^e` for `self > 0`.
    fn powf(&self, e: &Self) -> Self {
        (self.ln() * e.clone()).exp()
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Real for f64 {
    const FLOOR_GUARD: f64 = 1e-12;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn powu(&self, n: u64) -> Self {
        match i32::try_from(n) {
            Ok(k) => self.powi(k),
            Err(_) => f64::powf(*self, n as f64),
        }
    }

    fn floor_u64(&self) -> Option<u64> {
        let f = self.floor();
        (f.is_finite() && f >= 0.0 && f < u64::MAX as f64).then_some(f as u64)
    }
}

pub const EXTENDED_BITS: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Binary floating point with a 128-bit mantissa.
#[derive(Clone)]
pub struct Extended(BigFloat);

impl Extended {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    /// Parses a decimal literal such as `"0.95306948857794052013"`.
    pub fn parse(s: &str) -> Option<Self> {
        CONSTS.with(|cc| {
            let v = BigFloat::parse(s, astro_float::Radix::Dec, EXTENDED_BITS, RM, &mut cc.borrow_mut());
            (!v.is_nan()).then_some(Extended(v))
        })
    }

    /// Decimal rendering with all significant digits.
    pub fn to_decimal(&self) -> String {
        CONSTS.with(|cc| {
            self.0
                .format(astro_float::Radix::Dec, RM, &mut cc.borrow_mut())
                .unwrap_or_else(|_| self.0.to_string())
        })
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for Extended {
    fn eq(&self, other: &Self) -> bool {
        self.0.partial_cmp(&other.0) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:ident) => {
        impl $trait for Extended {
            type Output = Extended;

            fn $method(self, rhs: Extended) -> Extended {
                Extended(self.0.$op(&rhs.0, EXTENDED_BITS, RM))
            }
        }

        impl $trait<&Extended> for &Extended {
            type Output = Extended;

            fn $method(self, rhs: &Extended) -> Extended {
                Extended(self.0.$op(&rhs.0, EXTENDED_BITS, RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Extended {
    type Output = Extended;

    fn neg(self) -> Extended {
        Extended(self.0.neg())
    }
}

impl Real for Extended {
    const FLOOR_GUARD: f64 = 1e-25;

    fn from_f64(x: f64) -> Self {
        Extended(BigFloat::from_f64(x, EXTENDED_BITS))
    }

    fn from_u64(n: u64) -> Self {
        Extended(BigFloat::from_u64(n, EXTENDED_BITS))
    }

    fn to_f64(&self) -> f64 {
        // astro-float has no direct conversion; go through the exact decimal
        // expansion, which rounds correctly on parse.
        if self.0.is_zero() {
            return 0.0;
        }
        self.to_decimal().parse::<f64>().unwrap_or(f64::NAN)
    }

    fn ln(&self) -> Self {
        CONSTS.with(|cc| Extended(self.0.ln(EXTENDED_BITS, RM, &mut cc.borrow_mut())))
    }

    fn exp(&self) -> Self {
        CONSTS.with(|cc| Extended(self.0.exp(EXTENDED_BITS, RM, &mut cc.borrow_mut())))
    }

    fn powu(&self, n: u64) -> Self {
        // Square-and-multiply; a few rounding steps instead of the exp/ln route.
        let mut result = Self::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    fn powf(&self, e: &Self) -> Self {
        CONSTS.with(|cc| Extended(self.0.pow(&e.0, EXTENDED_BITS, RM, &mut cc.borrow_mut())))
    }

    fn floor_u64(&self) -> Option<u64> {
        let f = self.0.floor();
        if f.is_nan() || f.is_inf() || f.is_negative() {
            return None;
        }
        let s = Extended(f).to_decimal();
        // floor() is an integer, so the decimal expansion parses exactly
        // whenever it fits.
        s.parse::<f64>().ok().filter(|x| *x < 9.0e15).map(|x| x as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64) -> Extended {
        Extended::from_f64(v)
    }

    #[test]
    fn seventh_root_matches_reference() {
        // (5/7)^(1/7) = 0.95306948857794052013349039411348157274 (mpmath, 60 digits)
        let r = (x(5.0) / x(7.0)).powf(&(x(1.0) / x(7.0)));
        let want = Extended::parse("0.953069488577940520133490394113481572740425748").unwrap();
        assert!((r - want).abs() < x(1e-37));
    }

    #[test]
    fn powu_agrees_with_exp_ln() {
        let a = x(0.999869036482577);
        let direct = a.powu(8389);
        let via_log = (a.ln() * Extended::from_u64(8389)).exp();
        assert!(((&direct - &via_log) / direct.clone()).abs() < x(1e-33));
    }

    #[test]
    fn floors_and_conversion() {
        assert_eq!(x(6.999).floor_u64(), Some(6));
        assert_eq!(x(7.0).floor_u64(), Some(7));
        assert_eq!(x(-0.5).floor_u64(), None);
        assert_eq!(x(0.1).to_f64(), 0.1);
        assert_eq!((x(1.0) / x(3.0)).to_f64(), 1.0 / 3.0);
        assert_eq!(Extended::zero().to_f64(), 0.0);
    }

    #[test]
    fn no_cancellation_near_one() {
        // (1 - α^N)/(1 - α) with α = 1 - 1e-12, N = 3 is 3 - 3e-12 + 1e-24.
        let a = x(1.0) - x(1e-12);
        let q = (x(1.0) - a.powu(3)) / (x(1.0) - a.clone());
        let err = (q - (x(3.0) - x(3e-12))).abs();
        assert!(err < x(1e-23));
    }
}
