//! Second variation of I_2m at u ≡ 1.
//!
//! With H the second variation, ½μ(S^n)^{−(2m−n)/n}H(φ) = ⟨𝒜φ, φ⟩ where
//! 𝒜φ = P_2m φ + (2m+n)/(2m−n)·P_2m1·φ − 4m/(2m−n)·P_2m1/μ(S^n)·∫φ.
//! 𝒜 is diagonal in spherical harmonics; its eigenvalues are exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{SphereMeasure, SpherePoint};
use crate::gjms::multiplier;
use crate::scalar::{rational_to, Real};
use crate::spectral::{Basis, SpectralFunction};

fn check(n: usize, m: usize) -> Result<()> {
    if 2 * m <= n {
        return Err(Error::InvalidArgument(format!("second variation needs 2m > n (n = {n}, m = {m})")));
    }
    Ok(())
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Eigenvalue of 𝒜 on degree α.
pub fn hessian_eigenvalue(n: usize, m: usize, alpha: usize) -> Result<BigRational> {
    check(n, m)?;
    let (ni, mi) = (n as i64, m as i64);
    let p0: BigRational = multiplier(n, m, 0);
    let shift = q(2 * mi + ni, 2 * mi - ni) * &p0;
    let pa: BigRational = multiplier(n, m, alpha);
    if alpha == 0 {
        // the mean-value term only acts on constants
        Ok(pa + shift - q(4 * mi, 2 * mi - ni) * p0)
    } else {
        Ok(pa + shift)
    }
}

/// 𝒜φ, coefficient-wise.
pub fn hessian_apply<T: Real>(phi: &SpectralFunction<T>, n: usize, m: usize) -> Result<SpectralFunction<T>> {
    if phi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.dim() });
    }
    let mu = (0..=phi.degree())
        .map(|a| hessian_eigenvalue(n, m, a).map(|x| rational_to::<T>(&x)))
        .collect::<Result<Vec<T>>>()?;
    Ok(phi.map_degrees(|a| mu[a]))
}

/// 2m·Π_{i=0}^{m}(n/2+i)·Π_{i=1}^{m−2}(n/2−i): the stated 𝒜-eigenvalue on
/// degree-2 harmonics.
pub fn h2_formula(n: usize, m: usize) -> BigRational {
    let (ni, mi) = (n as i64, m as i64);
    let up = (0..=mi).fold(BigRational::one(), |acc, i| acc * q(ni + 2 * i, 2));
    let down = (1..=mi - 2).fold(BigRational::one(), |acc, i| acc * q(ni - 2 * i, 2));
    q(2 * mi, 1) * up * down
}

/// [(m+n/2+1)(m+n/2+2) − (m−n/2−2)(m−n/2−1)]·Π_{i=0}^{m}(n/2+i)·Π_{i=1}^{m−3}(n/2−i):
/// the stated 𝒜-eigenvalue on degree-3 harmonics.
pub fn h3_formula(n: usize, m: usize) -> BigRational {
    let (ni, mi) = (n as i64, m as i64);
    let bracket = q((2 * mi + ni + 2) * (2 * mi + ni + 4) - (2 * mi - ni - 4) * (2 * mi - ni - 2), 4);
    let up = (0..=mi).fold(BigRational::one(), |acc, i| acc * q(ni + 2 * i, 2));
    let down = (1..=mi - 3).fold(BigRational::one(), |acc, i| acc * q(ni - 2 * i, 2));
    bracket * up * down
}

/// Comparison of a spectral eigenvalue with the matching closed formula.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub degree: usize,
    pub spectral: BigRational,
    pub formula: BigRational,
}

impl ClosedFormCheck {
    pub fn agrees(&self) -> bool {
        self.spectral == self.formula
    }
}

/// Exact 𝒜-eigenvalues for degrees 0..=L.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSpectrum {
    pub n: usize,
    pub m: usize,
    pub eigenvalues: Vec<BigRational>,
    pub has_negative: bool,
    pub first_negative_degree: Option<usize>,
    /// Present for odd n and m ≥ (n+5)/2: the degree-2 formula when
    /// m − (n+5)/2 is even, the degree-3 formula when odd.
    pub closed_form: Option<ClosedFormCheck>,
}

pub fn hessian_spectrum(n: usize, m: usize, max_degree: usize) -> Result<HessianSpectrum> {
    check(n, m)?;
    let eigenvalues = (0..=max_degree).map(|a| hessian_eigenvalue(n, m, a)).collect::<Result<Vec<_>>>()?;
    let first_negative_degree = eigenvalues.iter().position(|x| x.is_negative());
    let closed_form = if n % 2 == 1 && 2 * m >= n + 5 {
        let k = m - (n + 5) / 2;
        let (degree, formula) = if k % 2 == 0 { (2, h2_formula(n, m)) } else { (3, h3_formula(n, m)) };
        Some(ClosedFormCheck { degree, spectral: hessian_eigenvalue(n, m, degree)?, formula })
    } else {
        None
    };
    Ok(HessianSpectrum {
        n,
        m,
        has_negative: first_negative_degree.is_some(),
        first_negative_degree,
        eigenvalues,
        closed_form,
    })
}

/// A degree with a negative 𝒜-eigenvalue and its unit harmonic.
#[derive(Debug, Clone)]
pub struct InstabilityWitness<T> {
    pub degree: usize,
    pub eigenvalue: BigRational,
    pub perturbation: SpectralFunction<T>,
}

/// Searches degrees 2 and 3 for a negative eigenvalue, for odd n and m ≥ (n+5)/2.
pub fn instability_witness<T: Real>(n: usize, m: usize) -> Result<InstabilityWitness<T>> {
    if n % 2 == 0 || 2 * m < n + 5 {
        return Err(Error::InvalidArgument(format!("instability witness needs odd n and m >= (n+5)/2 (n = {n}, m = {m})")));
    }
    for degree in [2, 3] {
        let eigenvalue = hessian_eigenvalue(n, m, degree)?;
        if eigenvalue.is_negative() {
            let basis = if n == 1 { Basis::Circle } else { Basis::zonal(n, SpherePoint::north(n))? };
            let perturbation = SpectralFunction::harmonic(basis, degree, degree);
            return Ok(InstabilityWitness { degree, eigenvalue, perturbation });
        }
    }
    Err(Error::NotUnstable { n, m })
}

/// Predicted I(1+εφ) − I(1) to second order, ε²·μ(S^n)^{(2m−n)/n}·⟨𝒜φ, φ⟩.
pub fn predicted_gap<T: Real>(phi: &SpectralFunction<T>, n: usize, m: usize, eps: T) -> Result<T> {
    let a = hessian_apply(phi, n, m)?;
    let quad = a.inner(phi)?;
    let mu = SphereMeasure::<T>::new(n).total;
    let e = T::from_usize_lossy(2 * m - n) / T::from_usize_lossy(n);
    Ok(eps * eps * mu.powf(e) * quad)
}

/// Whether 𝒜 is zero on constants, i.e. μ_0 = 0.
pub fn scale_neutral(n: usize, m: usize) -> Result<bool> {
    Ok(hessian_eigenvalue(n, m, 0)?.is_zero())
}
