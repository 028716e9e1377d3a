//! Scalar fields the algebra kernel is generic over.
//!
//! Symbolic code runs over [`Rational`](crate::Rational), where every zero test
//! is exact. The floating point impls exist for numeric reuse of the dense
//! linear algebra and treat tiny magnitudes as zero.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A commutative field with a (possibly approximate) zero test.
pub trait Field:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` when zero tests are exact.
    const EXACT: bool;

    /// Zero test used for pivoting and term pruning.
    fn is_negligible(&self) -> bool;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-10
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    const EXACT: bool = false;

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-5
    }

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

/// Shorthand constructors for exact rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Canonical `"num/den"` rendering used by reports.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"a"`, `"a/b"` or a finite decimal such as `"-1.25"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim().trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() && whole_digits.is_empty() {
            return None;
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().ok()?
        };
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(w * &scale + f, scale);
        return Some(if negative { -mag } else { mag });
    }
    let n: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Sign of an exact rational as -1, 0 or 1.
pub fn sign(q: &BigRational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_are_canonical() {
        assert_eq!(rational_string(&rat(2, 6)), "1/3");
        assert_eq!(rational_string(&rat(4, -2)), "-2/1");
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("-1.25"), Some(rat(-5, 4)));
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn float_fields_use_tolerant_zero() {
        assert!(1e-12f64.is_negligible());
        assert!(!1e-3f64.is_negligible());
        assert!(!<BigRational as Field>::is_negligible(&rat(
            1,
            1_000_000_000
        )));
    }
}
