//! Exact rationals. Values are `num_rational::BigRational`; this module adds
//! the parsing and unit-interval helpers the rest of the crate leans on.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational;

/// Parses `p/q`, a bare integer, or a finite decimal such as `0.125` into a
/// reduced rational.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if int.is_empty()
            || frac.is_empty()
            || s.contains('/')
            || !frac.bytes().all(|c| c.is_ascii_digit())
        {
            return Err(Error::Parse(format!("malformed decimal {s:?}")));
        }
        let digits: BigInt = format!("{int}{frac}")
            .parse()
            .map_err(|e| Error::Parse(format!("decimal {s:?}: {e}")))?;
        return Ok(BigRational::new(
            digits,
            BigInt::from(10u32).pow(frac.len() as u32),
        ));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|e| Error::Parse(format!("numerator {num:?}: {e}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|e| Error::Parse(format!("denominator {den:?}: {e}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn ratio(p: impl Into<BigInt>, q: impl Into<BigInt>) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Reduces and checks `0 <= x <= 1`, returning `(p, q)` in lowest terms.
pub fn unit_parts(x: &BigRational) -> Result<(BigUint, BigUint)> {
    let x = BigRational::new(x.numer().clone(), x.denom().clone());
    if x.is_negative() || x > BigRational::one() {
        return Err(Error::OutOfRange(x.to_string()));
    }
    let (p, q) = x.into();
    Ok((to_biguint(&p), to_biguint(&q)))
}

pub(crate) fn to_biguint(x: &BigInt) -> BigUint {
    x.to_biguint().expect("non-negative")
}

pub(crate) fn from_biguint(x: BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x)
}

/// `p/q` rendered as `"p/q"` with the denominator always present.
pub fn display_fraction(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Natural log of a positive big integer, via its top 64 bits.
pub fn ln_biguint(q: &BigUint) -> f64 {
    let bits = q.bits();
    if bits <= 64 {
        return (q.iter_u64_digits().next().unwrap_or(0) as f64).ln();
    }
    let shift = bits - 64;
    let top: BigUint = q >> shift;
    let top = top.iter_u64_digits().next().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    ln_biguint(&to_biguint(&x.numer().abs())) - ln_biguint(&to_biguint(x.denom()))
}

/// Nearest-ish `f64` to a rational, accurate to a few ulps even when the
/// numerator and denominator are far outside the `f64` range.
pub fn to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let neg = x.is_negative();
    let num = to_biguint(&x.numer().abs());
    let den = to_biguint(x.denom());
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        (num >> (-shift) as u64) / den
    };
    let top = scaled.bits().saturating_sub(64);
    let mant = (scaled >> top).iter_u64_digits().next().unwrap_or(0) as f64;
    let v = mant * 2f64.powi((top as i64 - shift) as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// Greatest common divisor of two machine integers.
#[inline]
pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
