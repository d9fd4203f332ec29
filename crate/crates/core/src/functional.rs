//! The energy E_2m, the norm |u^{-1}|²_{L^q} with q = 2n/(2m−n), the
//! scale-invariant functional I_2m = |u^{-1}|²_{L^q}·E_2m(u), its gradient and
//! the Euler–Lagrange residual.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::SphereMeasure;
use crate::gjms::{multiplier, MultiplierTable};
use crate::scalar::{factorial, rational_to, Real};
use crate::spectral::{quadrature::gauss_zonal, Basis, SpectralFunction, SpectralGrid, POSITIVITY_OVERSAMPLE};

/// Values below this on the check grid fail the positivity gate.
pub const POSITIVITY_THRESHOLD: f64 = 1e-8;

/// q = 2n/(2m−n). Requires 2m > n.
pub fn q_exponent<T: Real>(n: usize, m: usize) -> Result<T> {
    if 2 * m <= n {
        return Err(Error::InvalidArgument(format!("the functional needs 2m > n (n = {n}, m = {m})")));
    }
    Ok(T::from_usize_lossy(2 * n) / T::from_usize_lossy(2 * m - n))
}

fn multipliers<T: Real>(n: usize, m: usize, degree: usize) -> Vec<T> {
    MultiplierTable::new(n, m, degree).to_real()
}

/// E_2m(u, v) = ∫ P_2m u · v dμ.
pub fn energy<T: Real>(u: &SpectralFunction<T>, v: &SpectralFunction<T>, n: usize, m: usize) -> Result<T> {
    if u.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    let p = multipliers::<T>(n, m, u.degree().max(v.degree()));
    u.weighted_inner(v, |a| p[a])
}

/// The evaluation grid used by default: 4× the minimal node count for u's degree.
pub fn default_grid<T: Real>(u: &SpectralFunction<T>) -> SpectralGrid<T> {
    SpectralGrid::oversampled(u.dim(), u.degree(), POSITIVITY_OVERSAMPLE)
}

/// Node values of u on `grid`, after the positivity gate. Also returns the
/// minimum, which for zonal functions includes both poles.
fn gated_values<T: Real>(u: &SpectralFunction<T>, grid: &SpectralGrid<T>) -> Result<(Vec<T>, T)> {
    let vals = grid.synthesize(u)?;
    let mut min = vals.iter().copied().fold(T::infinity(), T::min);
    if let Basis::Zonal { .. } = u.basis() {
        min = min.min(u.eval_zonal(T::one())).min(u.eval_zonal(-T::one()));
    }
    if !(min > T::lit(POSITIVITY_THRESHOLD)) {
        return Err(Error::NonPositiveFunction { min_value: min.to_f64_lossy() });
    }
    Ok((vals, min))
}

struct NormParts<T> {
    vals: Vec<T>,
    min: T,
    /// ∫ u^{-q}
    integral: T,
    /// (∫ u^{-q})^{2/q}
    norm: T,
    q: T,
}

fn norm_parts<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<NormParts<T>> {
    if u.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    let q = q_exponent::<T>(n, m)?;
    let (vals, min) = gated_values(u, grid)?;
    let pw: Vec<T> = vals.iter().map(|&v| v.powf(-q)).collect();
    let integral = grid.integrate(&pw);
    // small q gives large powers; go through the logarithm
    let norm = ((T::lit(2.0) / q) * integral.ln()).exp();
    Ok(NormParts { vals, min, integral, norm, q })
}

/// |u^{-1}|²_{L^q} = (∫ u^{-q} dμ)^{2/q}.
pub fn neg_power_norm<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<T> {
    Ok(norm_parts(u, n, m, grid)?.norm)
}

/// Everything `functional_i` computes for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport<T> {
    #[serde(rename = "E")]
    pub energy: T,
    #[serde(rename = "negNorm")]
    pub neg_norm: T,
    #[serde(rename = "I")]
    pub functional: T,
    #[serde(rename = "elResidual")]
    pub el_residual: T,
    #[serde(rename = "minValue")]
    pub min_value: T,
}

fn residual_from_parts<T: Real>(
    u: &SpectralFunction<T>,
    n: usize,
    m: usize,
    grid: &SpectralGrid<T>,
    parts: &NormParts<T>,
    e: T,
) -> Result<T> {
    let pu = crate::gjms::apply_p2m(u, n, m)?;
    let pv = grid.synthesize(&pu)?;
    let kappa = e / parts.integral;
    let sq: Vec<T> = pv
        .iter()
        .zip(&parts.vals)
        .map(|(&p, &v)| {
            let r = p - kappa * v.powf(-parts.q - T::one());
            r * r
        })
        .collect();
    Ok(grid.integrate(&sq).max(T::zero()).sqrt())
}

/// E, the norm, I, the Euler–Lagrange residual and min u.
pub fn functional_i<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<EnergyReport<T>> {
    let parts = norm_parts(u, n, m, grid)?;
    let e = energy(u, u, n, m)?;
    let el = residual_from_parts(u, n, m, grid, &parts, e)?;
    Ok(EnergyReport { energy: e, neg_norm: parts.norm, functional: parts.norm * e, el_residual: el, min_value: parts.min })
}

/// I_2m(u) alone.
pub fn functional_value<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<T> {
    let parts = norm_parts(u, n, m, grid)?;
    Ok(parts.norm * energy(u, u, n, m)?)
}

/// L² norm of P_2m u − κ(u)·u^{−q−1} with κ(u) = E_2m(u)/∫u^{−q}.
pub fn el_residual<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<T> {
    let parts = norm_parts(u, n, m, grid)?;
    let e = energy(u, u, n, m)?;
    residual_from_parts(u, n, m, grid, &parts, e)
}

/// Value and L² gradient of I_2m, the gradient projected onto u's degrees:
/// 2N·P_2m u − 2(∫u^{−q})^{2/q−1}·E·u^{−q−1}, N the negative-power norm.
pub fn value_and_gradient<T: Real>(
    u: &SpectralFunction<T>,
    n: usize,
    m: usize,
    grid: &SpectralGrid<T>,
) -> Result<(T, SpectralFunction<T>)> {
    let parts = norm_parts(u, n, m, grid)?;
    let e = energy(u, u, n, m)?;
    let pu = crate::gjms::apply_p2m(u, n, m)?;
    let w: Vec<T> = parts.vals.iter().map(|&v| v.powf(-parts.q - T::one())).collect();
    let proj = grid.analyze(&w, u.basis().clone())?.with_degree(u.degree());
    let two = T::lit(2.0);
    let c = two * parts.norm / parts.integral * e;
    let grad = pu.scaled(two * parts.norm).axpy(-c, &proj)?;
    Ok((parts.norm * e, grad))
}

pub fn gradient_i<T: Real>(u: &SpectralFunction<T>, n: usize, m: usize, grid: &SpectralGrid<T>) -> Result<SpectralFunction<T>> {
    Ok(value_and_gradient(u, n, m, grid)?.1)
}

/// A constant of the form coeff·(measure_coeff·π^{pi_power})^{exponent},
/// with μ(S^n) = measure_coeff·π^{pi_power} for odd n.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpConstant {
    pub coeff: BigRational,
    pub measure_coeff: BigRational,
    pub pi_power: u32,
    /// exponent as (numerator, denominator), in lowest terms
    pub exponent: (u32, u32),
}

impl SharpConstant {
    pub fn to_f64(&self) -> f64 {
        let (a, b) = self.exponent;
        let mu = rational_to::<f64>(&self.measure_coeff) * std::f64::consts::PI.powi(self.pi_power as i32);
        rational_to::<f64>(&self.coeff) * mu.powf(a as f64 / b as f64)
    }

    /// Human-readable closed form; integer exponents are multiplied out.
    pub fn closed_form(&self) -> String {
        let (a, b) = self.exponent;
        if b == 1 {
            let c = &self.coeff * pow_rational(&self.measure_coeff, a);
            let p = self.pi_power * a;
            let num = c.numer().to_string();
            let lead = match (num.as_str(), c.denom().is_one()) {
                ("1", true) => String::new(),
                ("-1", true) => "-".into(),
                (_, true) => format!("{num}*"),
                _ => format!("({c})*"),
            };
            format!("{lead}pi^{p}")
        } else {
            format!("({})*({}*pi^{})^({a}/{b})", self.coeff, self.measure_coeff, self.pi_power)
        }
    }
}

fn pow_rational(q: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * q)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// μ(S^n) = 2π^{(n+1)/2}/((n−1)/2)! as (2/((n−1)/2)!, (n+1)/2), n odd.
fn odd_sphere_measure(n: usize) -> (BigRational, u32) {
    assert!(n % 2 == 1);
    (BigRational::new(BigInt::from(2), factorial(((n - 1) / 2) as u64)), ((n + 1) / 2) as u32)
}

/// I_2m(1) = p_2m(0)·μ(S^n)^{2m/n}, n odd, 2m > n.
pub fn constant_at_one(n: usize, m: usize) -> Result<SharpConstant> {
    if n % 2 == 0 || 2 * m <= n {
        return Err(Error::InvalidArgument(format!("closed forms need odd n and 2m > n (n = {n}, m = {m})")));
    }
    let (measure_coeff, pi_power) = odd_sphere_measure(n);
    let g = gcd(2 * m as u32, n as u32);
    Ok(SharpConstant {
        coeff: multiplier(n, m, 0),
        measure_coeff,
        pi_power,
        exponent: (2 * m as u32 / g, n as u32 / g),
    })
}

/// The theorem's stated constants for m = (n+1)/2 and m = (n+3)/2, built
/// from their factorial coefficients rather than from the multiplier.
pub fn stated_sharp_constant(n: usize, m: usize) -> Result<SharpConstant> {
    if n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("stated constants are for odd n, got {n}")));
    }
    let two = BigInt::from(2);
    let coeff = if 2 * m == n + 1 {
        -BigRational::new(factorial(2 * n as u64), two.pow(2 * n as u32 + 1) * factorial(n as u64))
    } else if 2 * m == n + 3 {
        BigRational::new(BigInt::from(3) * factorial(2 * n as u64 + 1), two.pow(2 * n as u32 + 3) * factorial(n as u64))
    } else {
        return Err(Error::InvalidArgument(format!("no stated constant for n = {n}, m = {m}")));
    };
    let (measure_coeff, pi_power) = odd_sphere_measure(n);
    let g = gcd(2 * m as u32, n as u32);
    Ok(SharpConstant { coeff, measure_coeff, pi_power, exponent: (2 * m as u32 / g, n as u32 / g) })
}

/// The order-4 energy on S^1 evaluated at u = sin θ, where u vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinCounterexample {
    /// E_4(sin θ)
    pub energy: f64,
    /// ∫_0^{2π} |sin θ|^{−2/3} dθ
    pub neg_power_integral: f64,
    /// (∫ |sin θ|^{−2/3})³
    pub neg_norm: f64,
    /// neg_norm·energy
    pub value: f64,
}

/// Evaluates |u^{-1}|²_{L^{2/3}}·E_4(u) at u = sin θ. The integral is finite
/// since |sin θ|^{−2/3} is integrable; it is computed with θ = s³ on each
/// quarter period, which makes the integrand smooth.
pub fn sin_counterexample(nodes: usize) -> SinCounterexample {
    let u = SpectralFunction::<f64>::harmonic(Basis::Circle, 1, 1).circle_derivative(1).expect("circle");
    // unit-norm sin θ/√π, rescaled to sin θ
    let u = u.scaled(-std::f64::consts::PI.sqrt());
    let e = energy(&u, &u, 1, 2).expect("dimension 1");
    // Gauss–Legendre from the zonal rule on S^2, whose weight is 2π on [−1, 1]
    let (t, w) = gauss_zonal::<f64>(2, nodes);
    let top = (std::f64::consts::FRAC_PI_2).cbrt();
    let quarter: f64 = t
        .iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let s = 0.5 * top * (t + 1.0);
            let th = s * s * s;
            let f = if th == 0.0 { 3.0 } else { 3.0 * (th / th.sin()).powf(2.0 / 3.0) };
            f * w / (2.0 * std::f64::consts::PI) * 0.5 * top
        })
        .sum();
    let integral = 4.0 * quarter;
    let neg_norm = integral.powi(3);
    SinCounterexample { energy: e, neg_power_integral: integral, neg_norm, value: neg_norm * e }
}

/// μ(S^n)^{2/q}·p(0)·μ, i.e. I_2m(1) in floating point.
pub fn value_at_one<T: Real>(n: usize, m: usize) -> Result<T> {
    let q = q_exponent::<T>(n, m)?;
    let mu = SphereMeasure::<T>::new(n).total;
    let p0 = multiplier::<f64>(n, m, 0);
    Ok(T::lit(p0) * mu * ((T::lit(2.0) / q) * mu.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use std::f64::consts::PI;

    fn one(basis: Basis<f64>, l: usize) -> SpectralFunction<f64> {
        SpectralFunction::constant(basis, l, 1.0)
    }

    #[test]
    fn energies_on_circle() {
        let u = one(Basis::Circle, 4);
        assert!((energy(&u, &u, 1, 1).unwrap() + PI / 2.0).abs() < 1e-14);
        // 1 − cos θ
        let c = SpectralFunction::harmonic(Basis::Circle, 4, 1).scaled(PI.sqrt());
        let v = u.axpy(-1.0, &c).unwrap();
        assert!((energy(&v, &v, 1, 1).unwrap() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn norms_of_one() {
        let u = one(Basis::Circle, 4);
        let g = default_grid(&u);
        assert!((neg_power_norm(&u, 1, 1, &g).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((neg_power_norm(&u, 1, 2, &g).unwrap() - 8.0 * PI.powi(3)).abs() < 1e-10);
        let v = u.scaled(3.0);
        assert!((neg_power_norm(&v, 1, 2, &g).unwrap() * 9.0 - 8.0 * PI.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn gate_rejects_sign_change() {
        let u = SpectralFunction::<f64>::harmonic(Basis::Circle, 2, 1);
        let g = default_grid(&u);
        assert!(matches!(functional_i(&u, 1, 1, &g), Err(Error::NonPositiveFunction { .. })));
    }

    #[test]
    fn values_at_one() {
        let u = one(Basis::Circle, 4);
        let g = default_grid(&u);
        for (m, want) in [(1, -PI * PI), (2, 9.0 * PI.powi(4)), (3, -225.0 * PI.powi(6))] {
            let r = functional_i(&u, 1, m, &g).unwrap();
            assert!(((r.functional - want) / want).abs() < 1e-12, "m = {m}");
            assert!(r.el_residual < 1e-12);
        }
    }

    #[test]
    fn constants_in_closed_form() {
        let c = constant_at_one(1, 1).unwrap();
        assert_eq!(c.closed_form(), "-pi^2");
        assert_eq!(constant_at_one(1, 2).unwrap().closed_form(), "9*pi^4");
        assert_eq!(constant_at_one(1, 3).unwrap().closed_form(), "-225*pi^6");
        let c = stated_sharp_constant(3, 2).unwrap();
        assert_eq!(c.coeff, rational(-15, 16));
        assert_eq!(c.exponent, (4, 3));
        assert_eq!(stated_sharp_constant(3, 3).unwrap().coeff, rational(315, 64));
        assert!((c.to_f64() + 15.0 / 16.0 * (2.0 * PI * PI).powf(4.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn sin_energy_is_negative() {
        let r = sin_counterexample(40);
        assert!((r.energy + 15.0 * PI / 16.0).abs() < 1e-13);
        assert!(r.neg_power_integral.is_finite() && r.value < 0.0);
    }
}
