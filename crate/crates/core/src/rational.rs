//! Exact rational parsing and formatting.
//!
//! All numeric data in this crate is kept as arbitrary-precision rationals;
//! nothing is ever rounded through floating point. The accepted textual forms
//! are `p/q`, plain integers, and decimal strings such as `0.5` (converted
//! exactly).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, the weight domain of every system.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

fn err(input: &str, reason: impl Into<String>) -> ParseRationalError {
    ParseRationalError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parses `p/q`, an integer, or a decimal string, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(err(text, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|e| err(text, format!("numerator: {e}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|e| err(text, format!("denominator: {e}")))?;
        if d.is_zero() {
            return Err(err(text, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let i: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|e| err(text, format!("integer part: {e}")))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(text, "fractional part must be digits"));
        }
        let f: BigInt = frac_part
            .parse()
            .map_err(|e| err(text, format!("fractional part: {e}")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude = i.abs() * &scale + f;
        return Ok(BigRational::new(magnitude * sign, scale));
    }
    let n: BigInt = s.parse().map_err(|e| err(text, format!("{e}")))?;
    Ok(BigRational::from_integer(n))
}

/// Renders a rational as `p/q`, or as a bare integer when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `r^k` for a nonnegative integer exponent, with `r^0 = 1`.
pub fn rational_pow(r: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    let mut base = r.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(
            parse_rational("1/2").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_rational("-3/6").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(
            parse_rational("7").unwrap(),
            BigRational::from_integer(7.into())
        );
        assert_eq!(
            parse_rational("0.5").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_rational("-1.25").unwrap(),
            BigRational::new((-5).into(), 4.into())
        );
        assert_eq!(
            parse_rational(" 2/4 ").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("1.-2").is_err());
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("8/4").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("-0.75").unwrap()), "-3/4");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let half = parse_rational("1/2").unwrap();
        assert_eq!(rational_pow(&half, 0), Rational::one());
        assert_eq!(
            rational_pow(&half, 10),
            BigRational::new(1.into(), 1024.into())
        );
    }
}
