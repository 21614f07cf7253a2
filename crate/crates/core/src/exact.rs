//! Exact rational numbers with a decimal-first text form.
//!
//! Every quantity in the engine is backed by [`Exact`], an arbitrary
//! precision rational. Addition, multiplication and division never round, so
//! sums are order independent and amortization closes exactly over a
//! lifetime. Rounding only happens through [`Exact::round_half_up`] and
//! [`Exact::truncate`] when a value is presented.
//!
//! The canonical text form is a plain decimal (`"3391.5"`) whenever the value
//! has a terminating decimal expansion, and a reduced fraction (`"2/3"`)
//! otherwise. Both forms parse back to the identical value.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number {input:?}: {reason}")]
pub struct ParseExactError {
    input: String,
    reason: &'static str,
}

impl ParseExactError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self {
            input: input.to_owned(),
            reason,
        }
    }
}

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exact(BigRational);

impl Exact {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_integer(value: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(value)))
    }

    /// `numer / denom`. Panics if `denom` is zero.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_rational(value: BigRational) -> Self {
        Self(value)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Division returning `None` for a zero divisor.
    pub fn checked_div(&self, rhs: &Exact) -> Option<Exact> {
        if rhs.is_zero() {
            None
        } else {
            Some(Exact(&self.0 / &rhs.0))
        }
    }

    pub fn abs(&self) -> Exact {
        Exact(self.0.abs())
    }

    pub fn min(self, other: Exact) -> Exact {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Exact) -> Exact {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion for statistics and plotting.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Rounds to `places` decimal places, ties away from zero.
    pub fn round_half_up(&self, places: u32) -> Exact {
        let scale = pow10(places);
        let scaled = &self.0 * &scale;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rounded = if scaled.is_negative() {
            -((-scaled) + half).floor()
        } else {
            (scaled + half).floor()
        };
        Exact(rounded / scale)
    }

    /// Truncates toward zero at `places` decimal places.
    pub fn truncate(&self, places: u32) -> Exact {
        let scale = pow10(places);
        Exact((&self.0 * &scale).trunc() / scale)
    }

    /// Renders with exactly `places` digits after the point. The value is
    /// rounded half-up first.
    pub fn to_fixed(&self, places: u32) -> String {
        let rounded = self.round_half_up(places);
        let scaled = (rounded.0 * pow10(places)).to_integer();
        let negative = scaled.sign() == Sign::Minus;
        let digits = scaled.magnitude().to_string();
        let places = places as usize;
        let body = if places == 0 {
            digits
        } else {
            let padded = format!("{:0>width$}", digits, width = places + 1);
            let (int, frac) = padded.split_at(padded.len() - places);
            format!("{int}.{frac}")
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Returns the terminating decimal expansion, or `None` when the reduced
    /// denominator has a prime factor other than 2 or 5.
    pub fn to_decimal_string(&self) -> Option<String> {
        let denom = self.0.denom().clone();
        let mut rest = denom.clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        while rest.is_multiple_of(&two) {
            rest /= &two;
            twos += 1;
        }
        while rest.is_multiple_of(&five) {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let mut text = self.to_fixed(places);
        if text.contains('.') {
            while text.ends_with('0') {
                text.pop();
            }
            if text.ends_with('.') {
                text.pop();
            }
        }
        Some(text)
    }
}

fn pow10(places: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(10), places as usize))
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(text) => f.write_str(&text),
            None => write!(f, "{}/{}", self.0.numer(), self.0.denom()),
        }
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exact({self})")
    }
}

impl FromStr for Exact {
    type Err = ParseExactError;

    /// Accepts plain decimals (`-12.50`), scientific notation (`1.5e3`) and
    /// fractions (`2/3`).
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        if s.is_empty() {
            return Err(ParseExactError::new(input, "empty"));
        }
        if let Some((numer, denom)) = s.split_once('/') {
            let numer = parse_decimal(numer.trim()).ok_or_else(|| ParseExactError::new(input, "bad numerator"))?;
            let denom = parse_decimal(denom.trim()).ok_or_else(|| ParseExactError::new(input, "bad denominator"))?;
            if denom.is_zero() {
                return Err(ParseExactError::new(input, "zero denominator"));
            }
            return Ok(Exact(numer / denom));
        }
        parse_decimal(s)
            .map(Exact)
            .ok_or_else(|| ParseExactError::new(input, "not a decimal number"))
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if shift >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, shift.unsigned_abs() as usize));
    }
    Some(if negative { -value } else { value })
}

impl From<i64> for Exact {
    fn from(value: i64) -> Self {
        Exact::from_integer(value)
    }
}

impl From<u64> for Exact {
    fn from(value: u64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(value)))
    }
}

impl From<u32> for Exact {
    fn from(value: u32) -> Self {
        Exact::from_integer(i64::from(value))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                Exact($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<&'a Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                Exact($trait::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact(-self.0)
    }
}

impl Sum for Exact {
    fn sum<I: Iterator<Item = Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Exact> for Exact {
    fn sum<I: Iterator<Item = &'a Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for Exact {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Exact {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = Exact;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal string, fraction string, or number")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Exact, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact::from_integer(v))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact::from(v))
            }

            // Floats go through their shortest round-trip text so that 0.175
            // becomes 175/1000 rather than its binary neighbour.
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Exact, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                format!("{v:?}").parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(s: &str) -> Exact {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimal_forms() {
        assert_eq!(x("0.175"), Exact::ratio(7, 40));
        assert_eq!(x("-12.50"), Exact::ratio(-25, 2));
        assert_eq!(x("1.5e3"), Exact::from_integer(1500));
        assert_eq!(x("25E-2"), Exact::ratio(1, 4));
        assert_eq!(x(".5"), Exact::ratio(1, 2));
        assert_eq!(x("2/3"), Exact::ratio(2, 3));
        assert_eq!(x("1.5/0.5"), Exact::from_integer(3));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1/0", "--1", ".", "1e", "0x10", "NaN"] {
            assert!(bad.parse::<Exact>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn display_prefers_decimal() {
        assert_eq!(x("3391.5").to_string(), "3391.5");
        assert_eq!(x("1065.90").to_string(), "1065.9");
        assert_eq!(x("-0.125").to_string(), "-0.125");
        assert_eq!(Exact::ratio(2, 3).to_string(), "2/3");
        assert_eq!(Exact::zero().to_string(), "0");
    }

    #[test]
    fn rounding_modes() {
        assert_eq!(x("1806.98").truncate(0), 1806);
        assert_eq!(x("1806.98").round_half_up(0), 1807);
        assert_eq!(x("4408.5").round_half_up(0), 4409);
        assert_eq!(x("-2.5").round_half_up(0), -3);
        assert_eq!(x("0.365").round_half_up(2), x("0.37"));
        assert_eq!(Exact::ratio(2, 3).to_fixed(3), "0.667");
        assert_eq!(x("0.05").to_fixed(2), "0.05");
        assert_eq!(x("-0.05").to_fixed(1), "-0.1");
        assert_eq!(x("9302.4").to_fixed(0), "9302");
    }

    #[test]
    fn serde_uses_strings() {
        let v = Exact::ratio(7, 3);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "\"7/3\"");
        assert_eq!(serde_json::from_str::<Exact>(&json).unwrap(), v);
        assert_eq!(serde_json::from_str::<Exact>("0.175").unwrap(), x("0.175"));
        assert_eq!(serde_json::from_str::<Exact>("203").unwrap(), Exact::from_integer(203));
    }
}
