//! Conformal pullback u_φ = J_φ^{(n−2m)/(2n)}·u∘φ, the extremal family, and
//! the barycenter C(a) = ∫ u_{σ_a}(ζ) ζ dμ used to fix the Möbius gauge.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::geometry::{norm, MobiusMap, SphereMeasure, SpherePoint};
use crate::functional::{default_grid, functional_value, POSITIVITY_THRESHOLD};
use crate::scalar::{gamma_half, Real};
use crate::spectral::{min_on_check_grid, Basis, QuadratureRule, SpectralFunction, SpectralGrid};

/// Node oversampling used when re-projecting a pulled-back function.
pub const PULLBACK_OVERSAMPLE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackSpec<T> {
    pub map: MobiusMap<T>,
    pub n: usize,
    pub m: usize,
}

impl<T: Real> PullbackSpec<T> {
    pub fn new(map: MobiusMap<T>, n: usize, m: usize) -> Self {
        Self { map, n, m }
    }

    /// (n−2m)/(2n), exact.
    pub fn exponent(&self) -> Rational64 {
        Rational64::new(self.n as i64 - 2 * self.m as i64, 2 * self.n as i64)
    }

    fn exponent_real(&self) -> T {
        let e = self.exponent();
        T::lit(*e.numer() as f64) / T::lit(*e.denom() as f64)
    }

    /// u_φ at one point.
    pub fn value_at(&self, u: &SpectralFunction<T>, zeta: &SpherePoint<T>) -> Result<T> {
        let j = self.map.jacobian(zeta);
        Ok(j.powf(self.exponent_real()) * u.eval(&self.map.apply(zeta))?)
    }
}

/// Axis-sharing test for zonal inputs. σ_{−ξ,1/λ} = σ_{ξ,λ}, so ±axis both pass.
fn check_zonal_map<T: Real>(basis: &Basis<T>, map: &MobiusMap<T>) -> Result<()> {
    let Basis::Zonal { axis, .. } = basis else {
        return Ok(());
    };
    if map.is_identity() {
        return Ok(());
    }
    let Some((ax, _)) = map.as_axis_dilation() else {
        return Err(Error::AxisMismatch { mismatch: f64::INFINITY });
    };
    let c = ax.dot(axis).abs();
    let mismatch = (T::one() - c).max(T::zero());
    if mismatch > T::lit(1e-12) {
        return Err(Error::AxisMismatch { mismatch: mismatch.to_f64_lossy() });
    }
    Ok(())
}

/// u_φ re-projected to degree `degree` on a 2×-oversampled grid.
pub fn pullback_to_degree<T: Real>(u: &SpectralFunction<T>, spec: &PullbackSpec<T>, degree: usize) -> Result<SpectralFunction<T>> {
    if u.dim() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: u.dim() });
    }
    check_zonal_map(u.basis(), &spec.map)?;
    let grid = SpectralGrid::oversampled(spec.n, degree, PULLBACK_OVERSAMPLE);
    let vals = grid
        .points(&u.basis().axis())
        .iter()
        .map(|p| spec.value_at(u, p))
        .collect::<Result<Vec<T>>>()?;
    grid.analyze(&vals, u.basis().clone())
}

/// u_φ at u's own truncation degree.
pub fn pullback<T: Real>(u: &SpectralFunction<T>, spec: &PullbackSpec<T>) -> Result<SpectralFunction<T>> {
    pullback_to_degree(u, spec, u.degree())
}

/// c·((1+λ²|π_ξ|²)/(λ(1+|π_ξ|²)))^{(2m−n)/2}, i.e. the pullback of the
/// constant c under σ_{ξ,λ}, projected to degree L. Zonal about ξ for n ≥ 2.
pub fn extremal<T: Real>(n: usize, m: usize, xi: &SpherePoint<T>, lambda: T, c: T, degree: usize) -> Result<SpectralFunction<T>> {
    if !(lambda > T::zero()) || !(c > T::zero()) {
        return Err(Error::InvalidArgument("extremal needs λ > 0 and c > 0".into()));
    }
    if xi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.dim() });
    }
    let basis = if n == 1 { Basis::Circle } else { Basis::zonal(n, xi.clone())? };
    let grid = SpectralGrid::oversampled(n, degree, PULLBACK_OVERSAMPLE);
    let e = (T::from_usize_lossy(2 * m) - T::from_usize_lossy(n)) / T::lit(2.0);
    let vals: Vec<T> = grid
        .points(&basis.axis())
        .iter()
        .map(|p| c * extremal_profile(xi.dot(p), lambda).powf(e))
        .collect();
    grid.analyze(&vals, basis)
}

/// (1+λ²|π_ξ|²)/(λ(1+|π_ξ|²)) written in t = ζ·ξ, where |π_ξ|² = (1+t)/(1−t).
pub fn extremal_profile<T: Real>(t: T, lambda: T) -> T {
    ((T::one() - t) + lambda * lambda * (T::one() + t)) / (T::lit(2.0) * lambda)
}

fn gate<T: Real>(u: &SpectralFunction<T>) -> Result<()> {
    let min = min_on_check_grid(u);
    if !(min > T::lit(POSITIVITY_THRESHOLD)) {
        return Err(Error::NonPositiveFunction { min_value: min.to_f64_lossy() });
    }
    Ok(())
}

fn ball_map<T: Real>(a: &[T]) -> Result<MobiusMap<T>> {
    MobiusMap::ball_point(a.to_vec())
}

/// C(a) without the positivity gate.
fn barycenter_raw<T: Real>(u: &SpectralFunction<T>, m: usize, a: &[T], rule: &QuadratureRule<T>) -> Result<Vec<T>> {
    let n = u.dim();
    let spec = PullbackSpec::new(ball_map(a)?, n, m);
    if let Basis::Zonal { axis, .. } = u.basis() {
        check_zonal_map(u.basis(), &spec.map)?;
        // u_{σ_a} is zonal about the same axis, so C is a multiple of it
        let pts = rule.points(axis);
        let vals = pts
            .iter()
            .zip(rule.nodes())
            .map(|(p, &t)| Ok(spec.value_at(u, p)? * t))
            .collect::<Result<Vec<T>>>()?;
        let s = rule.integrate(&vals);
        return Ok(axis.coords().iter().map(|&x| x * s).collect());
    }
    let pts = rule.points(&SpherePoint::north(1));
    let mut out = vec![T::zero(); n + 1];
    for (p, &w) in pts.iter().zip(rule.weights()) {
        let v = spec.value_at(u, p)? * w;
        out.iter_mut().zip(p.coords()).for_each(|(o, &x)| *o = *o + v * x);
    }
    Ok(out)
}

/// C(a) = ∫ u_{σ_a}(ζ) ζ dμ by the given rule. On S^n with n ≥ 2 (zonal
/// functions), a must lie on the function's axis.
pub fn barycenter<T: Real>(u: &SpectralFunction<T>, m: usize, a: &[T], rule: &QuadratureRule<T>) -> Result<Vec<T>> {
    gate(u)?;
    if a.len() != u.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: u.dim() + 1, got: a.len() });
    }
    if rule.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: rule.dim() });
    }
    barycenter_raw(u, m, a, rule)
}

/// A ball point together with the barycenter there.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterState<T> {
    pub a: Vec<T>,
    pub c: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> BarycenterState<T> {
    pub fn residual(&self) -> T {
        norm(&self.c)
    }
}

/// Tolerance on |C(a*)| for [`find_center`].
pub const CENTER_TOLERANCE: f64 = 1e-8;
const CENTER_MAX_ITER: usize = 100;

/// A ball point a* with C(a*) = 0: damped Newton with a finite-difference
/// Jacobian on S^1; safeguarded Newton along the axis for zonal functions.
pub fn find_center<T: Real>(u: &SpectralFunction<T>, m: usize, rule: &QuadratureRule<T>) -> Result<BarycenterState<T>> {
    gate(u)?;
    if rule.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: rule.dim() });
    }
    match u.basis() {
        Basis::Circle => newton_circle(u, m, rule),
        Basis::Zonal { axis, .. } => newton_axis(u, m, rule, axis),
    }
}

fn initial_guess<T: Real>(u: &SpectralFunction<T>, m: usize, rule: &QuadratureRule<T>) -> Result<Vec<T>> {
    let dim = u.dim() + 1;
    let c0 = barycenter_raw(u, m, &vec![T::zero(); dim], rule)?;
    let mu = SphereMeasure::<T>::new(u.dim()).total;
    let mass = u.mean() * mu;
    let moment: Vec<T> = c0.iter().map(|&c| c / mass).collect();
    let r = norm(&moment);
    Ok(moment.iter().map(|&x| x / (T::one() + r)).collect())
}

fn newton_circle<T: Real>(u: &SpectralFunction<T>, m: usize, rule: &QuadratureRule<T>) -> Result<BarycenterState<T>> {
    let tol = T::lit(CENTER_TOLERANCE);
    let h = T::lit(1e-6);
    let mut a = initial_guess(u, m, rule)?;
    let mut c = barycenter_raw(u, m, &a, rule)?;
    for it in 0..CENTER_MAX_ITER {
        if norm(&c) < tol {
            return Ok(BarycenterState { a, c, iterations: it });
        }
        // central-difference Jacobian, columns ∂C/∂a_j
        let mut jac = [[T::zero(); 2]; 2];
        for j in 0..2 {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[j] = ap[j] + h;
            am[j] = am[j] - h;
            let (cp, cm) = (barycenter_raw(u, m, &ap, rule)?, barycenter_raw(u, m, &am, rule)?);
            for i in 0..2 {
                jac[i][j] = (cp[i] - cm[i]) / (h + h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == T::zero() || !det.is_finite() {
            break;
        }
        let dx = (jac[1][1] * c[0] - jac[0][1] * c[1]) / det;
        let dy = (jac[0][0] * c[1] - jac[1][0] * c[0]) / det;
        let mut step = T::one();
        let r0 = norm(&c);
        let mut accepted = false;
        for _ in 0..60 {
            let trial = vec![a[0] - step * dx, a[1] - step * dy];
            if norm(&trial) < T::one() {
                let ct = barycenter_raw(u, m, &trial, rule)?;
                if norm(&ct) < r0 {
                    a = trial;
                    c = ct;
                    accepted = true;
                    break;
                }
            }
            step = step / T::lit(2.0);
        }
        if !accepted {
            break;
        }
    }
    if norm(&c) < tol {
        return Ok(BarycenterState { a, c, iterations: CENTER_MAX_ITER });
    }
    Err(Error::NoConvergence { iterations: CENTER_MAX_ITER, residual: norm(&c).to_f64_lossy() })
}

fn newton_axis<T: Real>(
    u: &SpectralFunction<T>,
    m: usize,
    rule: &QuadratureRule<T>,
    axis: &SpherePoint<T>,
) -> Result<BarycenterState<T>> {
    let tol = T::lit(CENTER_TOLERANCE);
    let at = |s: T| -> Vec<T> { axis.coords().iter().map(|&x| x * s).collect() };
    let f = |s: T| -> Result<T> { Ok(axis.dot(&SpherePoint::from_raw_unchecked(barycenter_raw(u, m, &at(s), rule)?))) };
    // ξ·C(sξ) is positive near s = −1 and negative near s = 1
    let guess = initial_guess(u, m, rule)?;
    let mut s = axis.coords().iter().zip(&guess).fold(T::zero(), |acc, (&x, &g)| acc + x * g);
    let (mut lo, mut hi) = (-T::lit(0.5), T::lit(0.5));
    let mut gap = T::lit(0.5);
    while f(lo)? <= T::zero() || f(hi)? >= T::zero() {
        gap = gap / T::lit(4.0);
        if gap < T::lit(1e-12) {
            return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
        }
        lo = -(T::one() - gap);
        hi = T::one() - gap;
    }
    if !(s > lo && s < hi) {
        s = (lo + hi) / T::lit(2.0);
    }
    let h = T::lit(1e-7);
    for it in 0..CENTER_MAX_ITER {
        let fs = f(s)?;
        if fs.abs() < tol {
            let c = barycenter_raw(u, m, &at(s), rule)?;
            return Ok(BarycenterState { a: at(s), c, iterations: it });
        }
        if fs > T::zero() {
            lo = s;
        } else {
            hi = s;
        }
        let d = (f(s + h)? - f(s - h)?) / (h + h);
        let mut next = s - fs / d;
        if !(next > lo && next < hi) || !d.is_finite() {
            next = (lo + hi) / T::lit(2.0);
        }
        s = next;
    }
    let c = barycenter_raw(u, m, &at(s), rule)?;
    Err(Error::NoConvergence { iterations: CENTER_MAX_ITER, residual: norm(&c).to_f64_lossy() })
}

/// u_{σ_{a*}}: the recentered function, at u's degree.
pub fn recenter<T: Real>(u: &SpectralFunction<T>, m: usize, state: &BarycenterState<T>) -> Result<SpectralFunction<T>> {
    pullback(u, &PullbackSpec::new(ball_map(&state.a)?, u.dim(), m))
}

/// I_2m before and after the conformal pullback, the latter re-projected to
/// degree `degree`. Both are integrated on the grid for that degree.
pub fn invariance_pair<T: Real>(u: &SpectralFunction<T>, spec: &PullbackSpec<T>, degree: usize) -> Result<(T, T)> {
    let v = pullback_to_degree(u, spec, degree)?;
    let u = u.with_degree(degree.max(u.degree()));
    let before = functional_value(&u, spec.n, spec.m, &default_grid(&u))?;
    let after = functional_value(&v, spec.n, spec.m, &default_grid(&v))?;
    Ok((before, after))
}

/// c(m,n) = −∫ (1 − ζ·ξ)^{(2m−n)/2} (ζ·ξ) dμ, the constant in the boundary
/// limit (2λ)^{(2m−n)/2} C(a) → −c(m,n) u(−ξ) ξ, via Beta integrals.
pub fn boundary_constant<T: Real>(n: usize, m: usize) -> T {
    assert!(2 * m > n);
    let sphere_below = if n == 1 { T::lit(2.0) } else { SphereMeasure::<T>::new(n - 1).total };
    // t = 1 − (1−t) splits the moment into (1−t)-exponents m−1 and m
    let moment = beta_shift::<T>(2 * m - 2, n) - beta_shift::<T>(2 * m, n);
    -sphere_below * moment
}

/// ∫_{-1}^{1} (1−t)^{p2/2} (1+t)^{(n−2)/2} dt = 2^{p+h+1} Γ(p+1)Γ(h+1)/Γ(p+h+2).
fn beta_shift<T: Real>(p2: usize, n: usize) -> T {
    let g = gamma_half::<T>(p2 + 2) * gamma_half::<T>(n) / gamma_half::<T>(p2 + n + 2);
    T::lit(2.0).powf(T::from_usize_lossy(p2 + n) / T::lit(2.0)) * g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{default_grid, energy, functional_value};
    use std::f64::consts::PI;

    #[test]
    fn identity_pullback() {
        let u = SpectralFunction::<f64>::circle(&[3.0, 0.2, -0.1], &[0.3, 0.05]).unwrap();
        let v = pullback(&u, &PullbackSpec::new(MobiusMap::identity(1), 1, 1)).unwrap();
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_of_one_is_extremal() {
        let n = 1;
        let one = SpectralFunction::<f64>::constant(Basis::Circle, 40, 1.0);
        let map = MobiusMap::axis_dilation(SpherePoint::north(1), 2.0).unwrap();
        let v = pullback(&one, &PullbackSpec::new(map, n, 1)).unwrap();
        let w = extremal(n, 1, &SpherePoint::north(1), 2.0, 1.0, 40).unwrap();
        for (a, b) in v.coeffs().iter().zip(w.coeffs()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn extremal_attains_the_constant() {
        let u = extremal(1, 1, &SpherePoint::north(1), 2.0, 1.0, 32).unwrap();
        let i = functional_value(&u, 1, 1, &default_grid(&u)).unwrap();
        assert!(((i + PI * PI) / (PI * PI)).abs() < 1e-8);
    }

    #[test]
    fn energy_is_invariant_on_circle() {
        let u = SpectralFunction::<f64>::circle(&[3.0, 0.4, -0.2, 0.1], &[0.3, 0.1, -0.05]).unwrap();
        let map = MobiusMap::axis_dilation(SpherePoint::on_circle(0.7), 3.0).unwrap();
        let v = pullback_to_degree(&u, &PullbackSpec::new(map, 1, 1), 96).unwrap();
        let (e0, e1) = (energy(&u, &u, 1, 1).unwrap(), energy(&v, &v, 1, 1).unwrap());
        assert!(((e0 - e1) / e0).abs() < 1e-7);
    }

    #[test]
    fn zonal_rejects_off_axis_map() {
        let u = SpectralFunction::constant(Basis::zonal(3, SpherePoint::north(3)).unwrap(), 4, 1.0);
        let map = MobiusMap::axis_dilation(SpherePoint::basis(3, 0), 2.0).unwrap();
        assert!(matches!(pullback(&u, &PullbackSpec::new(map, 3, 2)), Err(Error::AxisMismatch { .. })));
    }

    #[test]
    fn constant_is_centered() {
        let u = SpectralFunction::constant(Basis::Circle, 4, 1.0);
        let rule = QuadratureRule::circle(64);
        let c = barycenter(&u, 1, &[0.0, 0.0], &rule).unwrap();
        assert!(norm(&c) < 1e-13);
        let st = find_center(&u, 1, &rule).unwrap();
        assert!(norm(&st.a) < 1e-12);
    }

    #[test]
    fn boundary_constant_s1() {
        // −∫ √2|sin(θ/2)| cos θ dθ = 4√2/3
        assert!((boundary_constant::<f64>(1, 1) - 4.0 * 2f64.sqrt() / 3.0).abs() < 1e-13);
    }
}
