//! Nonnegative extended reals `[0, ∞]`, the codomain of every distance.

use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use num::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

/// A value in `[0, ∞]`: an exact nonnegative rational or infinity.
///
/// Infinity absorbs addition and `max`; `min(∞, x) = x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(Rational),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(Rational::zero())
    }

    /// Wraps a rational, taking `|r|` as a convenience for lead magnitudes.
    pub fn from_abs(r: &Rational) -> Self {
        ExtValue::Finite(r.abs())
    }

    /// Wraps a nonnegative rational. Panics if `r < 0`; distances are never negative.
    pub fn finite(r: Rational) -> Self {
        assert!(!r.is_negative(), "distance values must be nonnegative");
        ExtValue::Finite(r)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtValue::Finite(r) if r.is_zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Finite(r) => Some(r),
            ExtValue::Infinite => None,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Multiplies by a nonnegative scalar. `0 · ∞ = 0`, so a zero factor
    /// annihilates even an infinite value (the convention used by truncated
    /// geometric sums with λ = 0).
    pub fn scale(&self, factor: &Rational) -> Self {
        assert!(!factor.is_negative(), "scaling factor must be nonnegative");
        match self {
            ExtValue::Finite(r) => ExtValue::Finite(r * factor),
            ExtValue::Infinite if factor.is_zero() => ExtValue::zero(),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }

    /// Parses `p/q`, integer, or decimal text, or `"inf"`.
    pub fn parse(text: &str) -> Result<Self, ParseRationalError> {
        if text.trim() == "inf" {
            return Ok(ExtValue::Infinite);
        }
        let r = parse_rational(text)?;
        if r.is_negative() {
            return Err(ParseRationalError {
                input: text.to_string(),
                reason: "distance values must be nonnegative".to_string(),
            });
        }
        Ok(ExtValue::Finite(r))
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Infinite, ExtValue::Infinite) => Ordering::Equal,
            (ExtValue::Infinite, ExtValue::Finite(_)) => Ordering::Greater,
            (ExtValue::Finite(_), ExtValue::Infinite) => Ordering::Less,
            (ExtValue::Finite(a), ExtValue::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ExtValue {
    type Output = ExtValue;

    fn add(self, other: ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl<'a> Add<&'a ExtValue> for ExtValue {
    type Output = ExtValue;

    fn add(self, other: &'a ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl Sum for ExtValue {
    fn sum<I: Iterator<Item = ExtValue>>(iter: I) -> ExtValue {
        iter.fold(ExtValue::zero(), |acc, v| acc + v)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(r) => write!(f, "{}", format_rational(r)),
            ExtValue::Infinite => write!(f, "inf"),
        }
    }
}

impl From<Rational> for ExtValue {
    fn from(r: Rational) -> Self {
        ExtValue::finite(r)
    }
}
