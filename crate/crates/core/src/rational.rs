//! Exact rational numbers and the few conversions the rest of the crate needs.
//!
//! [`Rational`] is `num_rational::BigRational`: always in lowest terms with a
//! positive denominator, and exact under `+ - * /` and comparison.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Decimal digits carried by irrational square roots.
pub const SQRT_DIGITS: u32 = 60;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p/q` or an integer literal, with optional sign and surrounding
/// whitespace.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    let err = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num = BigInt::from_str(num).map_err(|_| err("numerator is not an integer"))?;
    let den = match den {
        Some(d) => {
            let d = BigInt::from_str(d).map_err(|_| err("denominator is not an integer"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            d
        }
        None => BigInt::one(),
    };
    Ok(Rational::new(num, den))
}

/// Nearest-ish `f64` (within one ulp) of an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// `num / den` as `f64` without reducing the fraction first.
///
/// Used for huge common-denominator sums where a gcd would dominate the cost.
pub fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift so the integer quotient carries at least 64 significant bits.
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 { (num << shift as u64) / den } else { (num >> (-shift) as u64) / den };
    let mantissa = q.to_f64().unwrap_or(f64::INFINITY);
    mantissa * 2f64.powi(-(shift as i32))
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Greatest common divisor of two rationals: the largest `g > 0` with both
/// `x / g` and `y / g` integers. `gcd(0, y) = |y|`.
pub fn gcd(x: &Rational, y: &Rational) -> Rational {
    if x.is_zero() {
        return y.abs();
    }
    if y.is_zero() {
        return x.abs();
    }
    let l = x.denom().lcm(y.denom());
    let xn = x.numer() * (&l / x.denom());
    let yn = y.numer() * (&l / y.denom());
    Rational::new(xn.gcd(&yn), l)
}

/// Square root of a non-negative rational.
///
/// Exact when numerator and denominator are both perfect squares; otherwise a
/// truncated approximant with [`SQRT_DIGITS`] correct decimal digits.
pub fn sqrt(x: &Rational) -> Rational {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return Rational::zero();
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Rational::new(rn, rd);
    }
    // sqrt(n/d) = sqrt(n*d) / d
    let scale = BigInt::from(10u32).pow(SQRT_DIGITS);
    let root = (n * d * &scale * &scale).sqrt();
    Rational::new(root, d * scale)
}
