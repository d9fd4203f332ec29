//! Scalar abstractions.
//!
//! Floating computations are generic over [`Real`] (`f32`, `f64`). Exact
//! multiplier and polynomial arithmetic is generic over [`Scalar`], which is
//! also implemented for [`BigRational`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar used by the spectral, geometric and variational code.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A ring element that can be built from machine integers. Implemented for
/// the float types and for exact rationals.
pub trait Scalar: Clone + Num + Neg<Output = Self> + PartialOrd + Debug {
    fn from_int(k: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl Scalar for f32 {
    fn from_int(k: i64) -> Self {
        k as f32
    }
}

impl Scalar for f64 {
    fn from_int(k: i64) -> Self {
        k as f64
    }
}

impl Scalar for BigRational {
    fn from_int(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
}

/// Shorthand for an exact rational from a numerator and denominator.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Best-effort conversion of an exact rational to a float type.
pub fn rational_to<T: Real>(q: &BigRational) -> T {
    // numerator and denominator may exceed f64 range separately
    match q.to_f64() {
        Some(v) if v.is_finite() => T::lit(v),
        _ => {
            let (n, d) = (q.numer(), q.denom());
            let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
            let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
            T::lit(n / d)
        }
    }
}

/// Γ(k/2) for a positive integer k, built from the half-integer recurrences.
pub fn gamma_half<T: Real>(k: usize) -> T {
    assert!(k > 0, "gamma_half requires k > 0");
    let mut g = if k % 2 == 0 { T::one() } else { T::PI().sqrt() };
    // Γ(x+1) = xΓ(x) starting from Γ(1) or Γ(1/2)
    let mut x2 = if k % 2 == 0 { 2 } else { 1 };
    while x2 < k {
        g = g * T::from_usize_lossy(x2) / T::lit(2.0);
        x2 += 2;
    }
    g
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j))
}
