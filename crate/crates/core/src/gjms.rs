//! The operator P_2m on the round sphere as a spectral multiplier.
//!
//! On degree-α spherical harmonics P_2m acts by
//! p_2m(α) = Π_{i=0}^{m−1} (λ_α − (i + n/2)(i − n/2 + 1)),  λ_α = α(α+n−1).
//! Kernel and sign questions are decided in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{SphereMeasure, SpherePoint};
use crate::scalar::{factorial, rational_to, Real, Scalar};
use crate::spectral::{Basis, SpectralFunction, ZonalBasis};

fn check_orders(n: usize, m: usize) {
    assert!(n >= 1 && m >= 1, "need n >= 1 and m >= 1 (got n = {n}, m = {m})");
}

/// The i-th first-order factor λ_α − (i + n/2)(i − n/2 + 1), times 4.
fn factor_times_four(n: usize, alpha: usize, i: usize) -> i64 {
    let (n, a, i) = (n as i64, alpha as i64, i as i64);
    4 * a * (a + n - 1) - (2 * i + n) * (2 * i - n + 2)
}

/// p_2m(α) from the product of first-order factors.
pub fn multiplier<S: Scalar>(n: usize, m: usize, alpha: usize) -> S {
    check_orders(n, m);
    (0..m).fold(S::one(), |acc, i| acc * S::from_ratio(factor_times_four(n, alpha, i), 4))
}

/// p_2m(α) as Π((2α+n−1)² − (2i+1)²) / 4^m, computed independently of
/// [`multiplier`].
pub fn multiplier_squares_form(n: usize, m: usize, alpha: usize) -> BigRational {
    check_orders(n, m);
    let s = BigInt::from(2 * alpha + n - 1);
    let num = (0..m).fold(BigInt::one(), |acc, i| {
        let r = BigInt::from(2 * i + 1);
        acc * (&s * &s - &r * &r)
    });
    BigRational::new(num, BigInt::from(4).pow(m as u32))
}

/// One first-order factor of P_2m applied coefficient-wise.
pub fn apply_factor<T: Real>(u: &SpectralFunction<T>, i: usize) -> SpectralFunction<T> {
    let n = u.dim();
    u.map_degrees(|a| T::lit(factor_times_four(n, a, i) as f64 / 4.0))
}

/// Exact multipliers p_2m(0..=L).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    n: usize,
    m: usize,
    entries: Vec<BigRational>,
}

impl MultiplierTable {
    pub fn new(n: usize, m: usize, max_degree: usize) -> Self {
        let entries = (0..=max_degree).map(|a| multiplier::<BigRational>(n, m, a)).collect();
        Self { n, m, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, alpha: usize) -> &BigRational {
        &self.entries[alpha]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn to_real<T: Real>(&self) -> Vec<T> {
        self.entries.iter().map(rational_to).collect()
    }

    /// Degrees with a vanishing multiplier.
    pub fn zeros(&self) -> Vec<usize> {
        (0..self.entries.len()).filter(|&a| self.entries[a].is_zero()).collect()
    }
}

/// P_2m u, coefficient-wise. The dimension is taken from `u` and must equal `n`.
pub fn apply_p2m<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize) -> Result<SpectralFunction<T>> {
    if u.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    let p = MultiplierTable::new(n, m, u.degree()).to_real::<T>();
    Ok(u.map_degrees(|a| p[a]))
}

/// P_2m u computed as m successive first-order operators.
pub fn apply_p2m_factored<T: Real>(u: &SpectralFunction<T>, m: usize) -> SpectralFunction<T> {
    (0..m).fold(u.clone(), |acc, i| apply_factor(&acc, i))
}

/// {α : p_2m(α) = 0}. Zeros can only occur at α ≤ m.
pub fn kernel_degrees(n: usize, m: usize) -> Vec<usize> {
    MultiplierTable::new(n, m, m).zeros()
}

/// Q_2m = (2/(n−2m))·P_2m 1.
pub fn q_constant(n: usize, m: usize) -> Result<BigRational> {
    if 2 * m == n {
        return Err(Error::CriticalOrder { n });
    }
    let d = n as i64 - 2 * m as i64;
    Ok(multiplier::<BigRational>(n, m, 0) * BigRational::new(BigInt::from(2), BigInt::from(d)))
}

/// Multiplier of P_{n+3} as the three-group product
/// (λ − (n − 1/2)/2)(λ − 3(n + 1/2)/2)·Π_{i=0}^{(n−3)/2}(λ + (i + n/2)((n−2)/2 − i)).
///
/// The grouping is only meaningful for odd n, where (n+3)/2 is an integer.
pub fn p_n_plus_3_grouped(n: usize, alpha: usize) -> Result<BigRational> {
    if n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("P_(n+3) needs odd n, got n = {n}")));
    }
    let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let (a, n) = (alpha as i64, n as i64);
    let lambda = q(a * (a + n - 1), 1);
    let mut p = (&lambda - q(2 * n - 1, 4)) * (&lambda - q(3 * (2 * n + 1), 4));
    for i in 0..=(n - 3) / 2 {
        if n < 3 {
            break;
        }
        p *= &lambda + q((2 * i + n) * (n - 2 - 2 * i), 4);
    }
    Ok(p)
}

/// Volume of the unit ball in ℝ^n, π^{n/2}/Γ(n/2+1).
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    SphereMeasure::<T>::new(n).ball_volume
}

/// Green's function of P_2m with pole ξ, in the closed form
/// κ·(1+|π_ξ(ζ)|²)^{−(2m−n)/2}.
#[derive(Debug, Clone)]
pub struct GreenKernel<T> {
    n: usize,
    m: usize,
    pole: SpherePoint<T>,
    kappa: T,
}

impl<T: Real> GreenKernel<T> {
    pub fn new(n: usize, m: usize, pole: SpherePoint<T>) -> Result<Self> {
        if n % 2 == 0 || 2 * m <= n {
            return Err(Error::InvalidArgument(format!("Green's function needs odd n and 2m > n (n = {n}, m = {m})")));
        }
        if pole.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: pole.dim() });
        }
        let kappa = rational_to::<T>(&Self::kappa_rational(n, m)) / unit_ball_volume::<T>(n);
        Ok(Self { n, m, pole, kappa })
    }

    /// κ·ω_n = 2^{m−n−1}/((m−1)!·Π_{i=0}^{m}(n−2i)).
    pub fn kappa_rational(n: usize, m: usize) -> BigRational {
        let e = m as i64 - n as i64 - 1;
        let two = BigInt::from(2);
        let pow2 = if e >= 0 {
            BigRational::from_integer(two.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), two.pow((-e) as u32))
        };
        let prod = (0..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(n as i64 - 2 * i as i64));
        pow2 / BigRational::from_integer(factorial(m as u64 - 1) * prod)
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn pole(&self) -> &SpherePoint<T> {
        &self.pole
    }

    /// Uses 1+|π_ξ(ζ)|² = 2/(1−ζ·ξ), which stays finite up to and at the pole.
    pub fn closed_form(&self, zeta: &SpherePoint<T>) -> Result<T> {
        if zeta.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: zeta.dim() });
        }
        let t = self.pole.dot(zeta).min(T::one()).max(-T::one());
        let half = (T::one() - t) / T::lit(2.0);
        let e = T::from_usize_lossy(2 * self.m - self.n) / T::lit(2.0);
        Ok(self.kappa * half.powf(e))
    }

    /// Partial sum Σ_{α≤L} Z_α(ζ,ξ)/p_2m(α) of the spectral inverse, by
    /// direct evaluation. Suited to large L.
    pub fn series_value(&self, zeta: &SpherePoint<T>, degree: usize) -> Result<T> {
        if zeta.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: zeta.dim() });
        }
        let p = MultiplierTable::new(self.n, self.m, degree).to_real::<T>();
        let t = self.pole.dot(zeta).min(T::one()).max(-T::one());
        let pi = T::PI();
        if self.n == 1 {
            let psi = t.acos();
            let mut acc = T::one() / ((pi + pi) * p[0]);
            for (a, pa) in p.iter().enumerate().skip(1) {
                acc = acc + (psi * T::from_usize_lossy(a)).cos() / (pi * *pa);
            }
            Ok(acc)
        } else {
            let basis = ZonalBasis::<T>::new(self.n);
            let mut at_t = Vec::new();
            let mut at_pole = Vec::new();
            basis.eval_all(t, degree, &mut at_t);
            basis.eval_all(T::one(), degree, &mut at_pole);
            Ok(at_t.iter().zip(&at_pole).zip(&p).fold(T::zero(), |acc, ((&y, &y1), &pa)| acc + y * y1 / pa))
        }
    }
}

/// Coefficients of the degree-≤L reproducing kernel at ξ (the projection of δ_ξ).
pub fn point_evaluation_kernel<T: Real>(basis: &Basis<T>, xi: &SpherePoint<T>, degree: usize) -> Result<SpectralFunction<T>> {
    if xi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: xi.dim() });
    }
    let len = basis.len_for_degree(degree);
    let coeffs = (0..len)
        .map(|idx| SpectralFunction::basis_element(basis.clone(), degree, idx).eval(xi))
        .collect::<Result<Vec<T>>>()?;
    SpectralFunction::new(basis.clone(), coeffs)
}

/// Spectral inverse of P_2m applied to δ_ξ, truncated at degree L. On S^1 the
/// full Fourier basis is used; otherwise the zonal basis about ξ.
pub fn green_spectral<T: Real>(n: usize, m: usize, xi: &SpherePoint<T>, degree: usize) -> Result<SpectralFunction<T>> {
    let table = MultiplierTable::new(n, m, degree);
    if let Some(&a) = table.zeros().first() {
        return Err(Error::SingularOperator { degree: a });
    }
    let basis = if n == 1 { Basis::Circle } else { Basis::zonal(n, xi.clone())? };
    let delta = point_evaluation_kernel(&basis, xi, degree)?;
    let p = table.to_real::<T>();
    Ok(delta.map_degrees(|a| T::one() / p[a]))
}

/// Whether every multiplier in 0..=L is ≥ 0 (exact).
pub fn is_nonnegative(n: usize, m: usize, max_degree: usize) -> bool {
    MultiplierTable::new(n, m, max_degree).entries().iter().all(|p| !p.is_negative())
}
