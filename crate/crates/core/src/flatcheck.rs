//! Sphere-versus-plane checks on S^1 through stereographic projection from
//! the north pole N = (0, 1).
//!
//! Everything is evaluated in the half-angle chart φ = ψ/2 ∈ (0, π), ψ the
//! angle from N, where x = π_N(ζ) = −cot φ, dx = csc²φ dφ, d/dx = sin²φ d/dφ
//! and (1+x²)/2 = 1/(2 sin²φ). Writing U(φ) = u(θ = 2φ + π/2), the flat
//! functions are finite sums of sin^a φ · cos^b φ · U^{(k)}(φ), and the
//! integrals over ℝ become integrals of π-periodic functions over (0, π).

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::energy;
use crate::gjms::apply_p2m;
use crate::scalar::Real;
use crate::spectral::{Basis, SpectralFunction, SpectralGrid};

/// Tolerance on u(N) (and u′(N) for m = 2) for the vanishing hypotheses.
pub const VANISHING_TOLERANCE: f64 = 1e-10;
/// Angular radius of the cap around N that the conjugation check excludes.
pub const EXCLUDED_CAP: f64 = 0.5;
/// Largest |u| allowed inside the cap, relative to sup |u|.
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

/// coef · sin^a φ · cos^b φ · U^{(k)}(φ), keyed by (a, b, k).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChartExpr {
    terms: BTreeMap<(i32, i32, usize), f64>,
}

impl ChartExpr {
    /// coef · sin^a φ · U.
    pub fn sin_power_times_u(coef: f64, a: i32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((a, 0, 0), coef);
        Self { terms }
    }

    fn add(&mut self, key: (i32, i32, usize), c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// sin²φ · d/dφ, the flat derivative d/dx.
    pub fn flat_derivative(&self) -> Self {
        let mut out = Self::default();
        for (&(a, b, k), &c) in &self.terms {
            // d(s^a c^b) = a s^{a−1} c^{b+1} − b s^{a+1} c^{b−1}
            out.add((a + 1, b + 1, k), c * a as f64);
            out.add((a + 3, b - 1, k), -c * b as f64);
            out.add((a + 2, b, k + 1), c);
        }
        out
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(|&(_, _, k)| k).max().unwrap_or(0)
    }

    /// Value at φ given U^{(0..)}(φ).
    pub fn eval<T: Real>(&self, phi: T, derivs: &[T]) -> T {
        let (s, c) = phi.sin_cos();
        self.terms.iter().fold(T::zero(), |acc, (&(a, b, k), &coef)| acc + T::lit(coef) * s.powi(a) * c.powi(b) * derivs[k])
    }
}

/// θ of the half-angle coordinate φ.
pub fn theta_of_phi<T: Real>(phi: T) -> T {
    phi + phi + T::FRAC_PI_2()
}

/// U^{(k)}(φ) = 2^k u^{(k)}(θ), k = 0..=order, for a circle function.
struct ChartDerivatives<T> {
    derivs: Vec<SpectralFunction<T>>,
}

impl<T: Real> ChartDerivatives<T> {
    fn new(u: &SpectralFunction<T>, order: usize) -> Result<Self> {
        let derivs = (0..=order).map(|k| u.circle_derivative(k)).collect::<Result<Vec<_>>>()?;
        Ok(Self { derivs })
    }

    fn at(&self, phi: T) -> Vec<T> {
        let th = theta_of_phi(phi);
        let mut scale = T::one();
        self.derivs
            .iter()
            .map(|d| {
                let v = scale * d.eval_circle(th);
                scale = scale + scale;
                v
            })
            .collect()
    }
}

fn require_circle<T: Real>(u: &SpectralFunction<T>) -> Result<()> {
    if !matches!(u.basis(), Basis::Circle) {
        return Err(Error::DimensionMismatch { expected: 1, got: u.dim() });
    }
    Ok(())
}

fn require_order(m: usize) -> Result<()> {
    if !(1..=2).contains(&m) {
        return Err(Error::InvalidArgument(format!("flat checks cover m = 1, 2 on S^1, got m = {m}")));
    }
    Ok(())
}

/// Midpoint nodes on (0, π); spectrally accurate for π-periodic integrands.
fn midpoint<T: Real>(nodes: usize) -> impl Iterator<Item = (T, T)> {
    let h = T::PI() / T::from_usize_lossy(nodes);
    (0..nodes).map(move |j| ((T::from_usize_lossy(j) + T::lit(0.5)) * h, h))
}

fn default_nodes(degree: usize) -> usize {
    (16 * degree).max(512)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatEnergyReport<T> {
    #[serde(rename = "sphereEnergy")]
    pub sphere_energy: T,
    #[serde(rename = "flatEnergy")]
    pub flat_energy: T,
    #[serde(rename = "relError")]
    pub rel_error: T,
}

/// Checks u(N) = 0, and u′(N) = 0 when m = 2.
pub fn check_vanishing<T: Real>(u: &SpectralFunction<T>, m: usize) -> Result<()> {
    let north = T::FRAC_PI_2();
    let tol = T::lit(VANISHING_TOLERANCE);
    let v0 = u.eval_circle(north);
    if v0.abs() > tol {
        return Err(Error::PrecondViolated(format!("u(N) = {:e}, expected 0", v0.to_f64_lossy())));
    }
    if m == 2 {
        let v1 = u.circle_derivative(1)?.eval_circle(north);
        if v1.abs() > tol {
            return Err(Error::PrecondViolated(format!("u'(N) = {:e}, expected 0", v1.to_f64_lossy())));
        }
    }
    Ok(())
}

/// D^m(((1+x²)/2)^{(2m−1)/2} · U), D = d/dx, in the chart.
pub fn flat_integrand_expr(m: usize) -> ChartExpr {
    let e = 2 * m as i32 - 1;
    // ((1+x²)/2)^{e/2} = (2 sin²φ)^{−e/2}
    let mut f = ChartExpr::sin_power_times_u(2f64.powf(-(e as f64) / 2.0), -e);
    for _ in 0..m {
        f = f.flat_derivative();
    }
    f
}

/// E_2m(u) from the spectrum against ∫_ℝ |D^m(((1+x²)/2)^{(2m−1)/2} u∘π_N^{−1})|² dx.
pub fn flat_energy_identity<T: Real>(u: &SpectralFunction<T>, m: usize) -> Result<FlatEnergyReport<T>> {
    flat_energy_identity_with_nodes(u, m, default_nodes(u.degree()))
}

pub fn flat_energy_identity_with_nodes<T: Real>(u: &SpectralFunction<T>, m: usize, nodes: usize) -> Result<FlatEnergyReport<T>> {
    require_circle(u)?;
    require_order(m)?;
    check_vanishing(u, m)?;
    let sphere_energy = energy(u, u, 1, m)?;
    let expr = flat_integrand_expr(m);
    let d = ChartDerivatives::new(u, expr.max_order())?;
    let flat_energy = midpoint::<T>(nodes).fold(T::zero(), |acc, (phi, h)| {
        let v = expr.eval(phi, &d.at(phi));
        let s = phi.sin();
        // dx = dφ / sin²φ
        acc + h * v * v / (s * s)
    });
    let rel_error = (sphere_energy - flat_energy).abs() / sphere_energy.abs().max(T::lit(1e-14));
    Ok(FlatEnergyReport { sphere_energy, flat_energy, rel_error })
}

/// (−1)^m 2^{−2m} sin^{−(2m+1)}φ · D^{2m}(sin^{1−2m}φ · U), the conjugated
/// flat form of P_2m u.
pub fn conjugated_expr(m: usize) -> ChartExpr {
    let mut g = ChartExpr::sin_power_times_u(1.0, 1 - 2 * m as i32);
    for _ in 0..2 * m {
        g = g.flat_derivative();
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let scale = sign * 2f64.powi(-2 * m as i32);
    let mut out = ChartExpr::default();
    for (&(a, b, k), &c) in &g.terms {
        out.add((a - 2 * m as i32 - 1, b, k), c * scale);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugationReport<T> {
    /// max |spectral − conjugated| / max |spectral| over the samples
    #[serde(rename = "relError")]
    pub rel_error: T,
    #[serde(rename = "maxAbs")]
    pub max_abs: T,
}

/// Largest |u| in the cap of angular radius [`EXCLUDED_CAP`] around N,
/// relative to sup |u|, both sampled densely.
pub fn cap_fraction<T: Real>(u: &SpectralFunction<T>) -> T {
    let k = 8 * (2 * u.degree() + 2);
    let grid = SpectralGrid::for_synthesis(crate::spectral::QuadratureRule::circle(k), u.degree());
    let vals = grid.synthesize(u).expect("circle");
    let north = T::FRAC_PI_2();
    let cap = T::lit(EXCLUDED_CAP);
    let mut inside = T::zero();
    let mut sup = T::zero();
    for (&th, &v) in grid.rule().nodes().iter().zip(&vals) {
        sup = sup.max(v.abs());
        let mut d = (th - north).abs();
        if d > T::PI() {
            d = T::PI() + T::PI() - d;
        }
        if d < cap {
            inside = inside.max(v.abs());
        }
    }
    if sup == T::zero() {
        T::zero()
    } else {
        inside / sup
    }
}

/// Compares the multiplier form of P_2m u with its conjugated flat form at
/// `samples` points outside the excluded cap.
pub fn conjugation_check<T: Real>(u: &SpectralFunction<T>, m: usize, samples: usize) -> Result<ConjugationReport<T>> {
    require_circle(u)?;
    require_order(m)?;
    let frac = cap_fraction(u);
    if frac > T::lit(SUPPORT_TOLERANCE) {
        return Err(Error::SupportViolation { max_abs: frac.to_f64_lossy() });
    }
    let pu = apply_p2m(u, 1, m)?;
    let expr = conjugated_expr(m);
    let d = ChartDerivatives::new(u, expr.max_order())?;
    // φ = ψ/2 ranges over [cap/2, π − cap/2]
    let lo = T::lit(EXCLUDED_CAP / 2.0);
    let hi = T::PI() - lo;
    let mut diff = T::zero();
    let mut max_abs = T::zero();
    for j in 0..samples {
        let phi = lo + (hi - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(samples.max(2) - 1);
        let lhs = pu.eval_circle(theta_of_phi(phi));
        let rhs = expr.eval(phi, &d.at(phi));
        diff = diff.max((lhs - rhs).abs());
        max_abs = max_abs.max(lhs.abs());
    }
    let rel_error = if max_abs == T::zero() { diff } else { diff / max_abs };
    Ok(ConjugationReport { rel_error, max_abs })
}

/// Smooth bump exp(1 − 1/(1 − r²)), r = (ψ − π)/(π − 0.6), vanishing within
/// 0.6 rad of N, projected to degree L.
pub fn bump<T: Real>(degree: usize) -> SpectralFunction<T> {
    bump_times(degree, |_| T::one())
}

/// bump · g(θ), projected to degree L.
pub fn bump_times<T: Real>(degree: usize, g: impl Fn(T) -> T) -> SpectralFunction<T> {
    let grid = SpectralGrid::oversampled(1, degree, 4);
    let north = T::FRAC_PI_2();
    let width = T::PI() - T::lit(0.6);
    let vals: Vec<T> = grid
        .rule()
        .nodes()
        .iter()
        .map(|&th| {
            let mut psi = th - north;
            if psi < T::zero() {
                psi = psi + T::PI() + T::PI();
            }
            let r: T = (psi - T::PI()) / width;
            let b = if r.abs() < T::one() { (T::one() - T::one() / (T::one() - r * r)).exp() } else { T::zero() };
            b * g(th)
        })
        .collect();
    grid.analyze(&vals, Basis::Circle).expect("circle grid")
}

/// Random u of degree ≤ `active` (within a degree-L representation) with
/// u(N) = 0, and u′(N) = 0 when m = 2.
pub fn random_admissible<T: Real>(m: usize, degree: usize, active: usize, rng: &mut ChaCha8Rng) -> SpectralFunction<T> {
    let len = 2 * degree + 1;
    let act = 2 * active.clamp(1, degree) + 1;
    let mut coeffs = vec![T::zero(); len];
    for c in coeffs.iter_mut().take(act) {
        *c = T::lit(rng.random_range(-1.0..1.0));
    }
    let v = SpectralFunction::new(Basis::Circle, coeffs).expect("odd length");
    let north = T::FRAC_PI_2();
    let pi = T::PI();
    // subtract v(N) and, for m = 2, add v′(N) cos θ (cos vanishes at N with slope −1)
    let mut out = v.clone();
    out.coeffs_mut()[0] = out.coeffs()[0] - v.eval_circle(north) * (pi + pi).sqrt();
    if m == 2 {
        let d = v.circle_derivative(1).expect("circle").eval_circle(north);
        out.coeffs_mut()[1] = out.coeffs()[1] + d * pi.sqrt();
    }
    out
}

/// E_2m of U(φ) = sin^{2m−1}φ, i.e. u = (1+|π_N|²)^{−(2m−1)/2}, from the
/// sphere quadratic form Σ_j c_j ∫ (∂_θ^j u)² dθ in the half-angle chart.
/// The function has a kink at N, so it is evaluated directly rather than
/// through its slowly converging Fourier series.
pub fn null_vector_energy<T: Real>(m: usize, nodes: usize) -> Result<T> {
    require_order(m)?;
    // U = s^{2m−1}: derivatives in φ from the chart algebra with D replaced by d/dφ
    let p = 2 * m as i32 - 1;
    let u_at = |phi: T| -> [T; 3] {
        let (s, c) = phi.sin_cos();
        let pf = T::from_i32(p).expect("small");
        let u0 = s.powi(p);
        let u1 = pf * s.powi(p - 1) * c;
        let u2 = pf * (pf - T::one()) * s.powi(p - 2) * c * c - pf * s.powi(p);
        [u0, u1, u2]
    };
    quadratic_form_energy(m, nodes, u_at)
}

/// ∫_0^{2π} Σ_j c_j (∂_θ^j u)² dθ for the quadratic form of E_2m on S^1
/// (m=1: u_θ² − u²/4; m=2: u_θθ² − (5/2)u_θ² + (9/16)u²), written in the
/// half-angle chart with ∂_θ = ½∂_φ and dθ = 2dφ.
pub fn quadratic_form_energy<T: Real>(m: usize, nodes: usize, chart_values: impl Fn(T) -> [T; 3]) -> Result<T> {
    require_order(m)?;
    let c: [T; 3] = if m == 1 {
        [T::lit(-0.25), T::one(), T::zero()]
    } else {
        [T::lit(9.0 / 16.0), T::lit(-2.5), T::one()]
    };
    let two = T::lit(2.0);
    Ok(midpoint::<T>(nodes).fold(T::zero(), |acc, (phi, h)| {
        let [u0, u1, u2] = chart_values(phi);
        let (t1, t2) = (u1 / two, u2 / (two * two));
        acc + two * h * (c[0] * u0 * u0 + c[1] * t1 * t1 + c[2] * t2 * t2)
    }))
}
