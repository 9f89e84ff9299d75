//! Scalar fields used by the polynomial types.
//!
//! Two fields are supported: binary floats (`f64`) and exact rationals
//! ([`Rational`]). Polynomial types are generic over [`Scalar`], so mixing
//! the two modes requires an explicit conversion such as
//! [`CirclePoly::to_f64`](crate::poly::CirclePoly::to_f64).

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Whether a value is computed in exact or floating arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Signed
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: ScalarMode;

    fn to_f64(&self) -> f64;

    /// Conversion from a float. For rationals the conversion is exact.
    fn from_f64(v: f64) -> Self;

    fn from_i64(v: i64) -> Self;
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for Rational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator or denominator overflow f64; go through a scaled ratio
            let n = self.numer().bits() as i64;
            let d = self.denom().bits() as i64;
            let shift = (n - d) as i32;
            let scaled = if shift > 0 {
                self / Rational::from_integer(BigInt::one() << shift as usize)
            } else {
                self * Rational::from_integer(BigInt::one() << (-shift) as usize)
            };
            ToPrimitive::to_f64(&scaled).unwrap_or(0.0) * 2f64.powi(shift)
        })
    }

    fn from_f64(v: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(v).expect("finite float")
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
}

/// Rational from a numerator/denominator pair.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn approximate_rational(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e30 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

/// Largest absolute value in a slice, zero when empty.
pub fn max_abs<T: Scalar>(values: &[T]) -> f64 {
    values.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_fraction_recovers_small_ratios() {
        assert_eq!(approximate_rational(2.0 / 7.0, 1000), ratio(2, 7));
        assert_eq!(approximate_rational(-0.375, 100), ratio(-3, 8));
        assert_eq!(approximate_rational(3.0, 10), ratio(3, 1));
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = Rational::new(BigInt::one() << 2000usize, BigInt::from(3) << 1999usize);
        assert!((Scalar::to_f64(&big) - 2.0 / 3.0).abs() < 1e-12);
    }
}
