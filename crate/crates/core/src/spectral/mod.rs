//! Spectral representation of functions on S^n: full Fourier series on S^1,
//! zonal Gegenbauer expansions for n ≥ 2, and the quadrature-based
//! synthesis/analysis transforms between coefficients and node values.

mod function;
pub mod quadrature;

pub use function::{Basis, SpectralFunction};
pub use quadrature::{QuadratureRule, ZonalBasis};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::scalar::Real;

/// Basis values tabulated on the nodes of a quadrature rule, for repeated
/// synthesis/analysis at a fixed truncation degree.
#[derive(Debug, Clone)]
pub struct SpectralGrid<T> {
    rule: QuadratureRule<T>,
    degree: usize,
    width: usize,
    table: Vec<T>,
}

impl<T: Real> SpectralGrid<T> {
    /// Fails with `InsufficientNodes` unless the rule projects degree ≤ L exactly.
    pub fn new(rule: QuadratureRule<T>, degree: usize) -> Result<Self> {
        match rule.max_analysis_degree() {
            Some(max) if max >= degree => {}
            _ => return Err(Error::InsufficientNodes { nodes: rule.len(), degree }),
        }
        Ok(Self::tabulate(rule, degree))
    }

    /// Tabulates without the exactness check; only synthesis is reliable.
    pub fn for_synthesis(rule: QuadratureRule<T>, degree: usize) -> Self {
        Self::tabulate(rule, degree)
    }

    /// Rule with `oversample`× the minimal node count for degree L.
    pub fn oversampled(n: usize, degree: usize, oversample: usize) -> Self {
        Self::tabulate(QuadratureRule::for_degree(n, degree, oversample), degree)
    }

    fn tabulate(rule: QuadratureRule<T>, degree: usize) -> Self {
        let n = rule.dim();
        let width = if n == 1 { 2 * degree + 1 } else { degree + 1 };
        let mut table = Vec::with_capacity(rule.len() * width);
        if n == 1 {
            let pi = T::PI();
            let c0 = T::one() / (pi + pi).sqrt();
            let ck = T::one() / pi.sqrt();
            for &th in rule.nodes() {
                table.push(c0);
                for k in 1..=degree {
                    let (s, c) = (th * T::from_usize_lossy(k)).sin_cos();
                    table.push(ck * c);
                    table.push(ck * s);
                }
            }
        } else {
            let basis = ZonalBasis::<T>::new(n);
            let mut buf = Vec::with_capacity(width);
            for &t in rule.nodes() {
                basis.eval_all(t, degree, &mut buf);
                table.extend_from_slice(&buf);
            }
        }
        Self { rule, degree, width, table }
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.rule.dim()
    }

    fn check(&self, u: &SpectralFunction<T>) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.dim() });
        }
        Ok(())
    }

    /// Values of u on the rule nodes. Coefficients above the grid degree are
    /// summed by direct evaluation.
    pub fn synthesize(&self, u: &SpectralFunction<T>) -> Result<Vec<T>> {
        self.check(u)?;
        if u.degree() > self.degree {
            return Ok(self.rule.nodes().iter().map(|&x| point_value(u, x)).collect());
        }
        let c = u.coeffs();
        Ok(self
            .table
            .chunks_exact(self.width)
            .map(|row| row.iter().zip(c).fold(T::zero(), |acc, (&y, &a)| acc + y * a))
            .collect())
    }

    /// Orthogonal projection of node values onto degrees ≤ L of `basis`.
    pub fn analyze(&self, values: &[T], basis: Basis<T>) -> Result<SpectralFunction<T>> {
        if basis.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: basis.dim() });
        }
        if values.len() != self.rule.len() {
            return Err(Error::DimensionMismatch { expected: self.rule.len(), got: values.len() });
        }
        if self.rule.max_analysis_degree().is_none_or(|m| m < self.degree) {
            return Err(Error::InsufficientNodes { nodes: self.rule.len(), degree: self.degree });
        }
        let mut coeffs = vec![T::zero(); self.width];
        for ((row, &w), &f) in self.table.chunks_exact(self.width).zip(self.rule.weights()).zip(values) {
            let wf = w * f;
            coeffs.iter_mut().zip(row).for_each(|(c, &y)| *c = *c + wf * y);
        }
        SpectralFunction::new(basis, coeffs)
    }

    pub fn integrate(&self, values: &[T]) -> T {
        self.rule.integrate(values)
    }

    pub fn points(&self, axis: &SpherePoint<T>) -> Vec<SpherePoint<T>> {
        self.rule.points(axis)
    }
}

fn point_value<T: Real>(u: &SpectralFunction<T>, node: T) -> T {
    match u.basis() {
        Basis::Circle => u.eval_circle(node),
        Basis::Zonal { .. } => u.eval_zonal(node),
    }
}

/// Values of u at arbitrary points.
pub fn synthesize<T: Real>(u: &SpectralFunction<T>, points: &[SpherePoint<T>]) -> Result<Vec<T>> {
    points.iter().map(|p| u.eval(p)).collect()
}

/// Projection of node values onto degrees ≤ L.
pub fn analyze<T: Real>(
    values: &[T],
    rule: &QuadratureRule<T>,
    degree: usize,
    basis: Basis<T>,
) -> Result<SpectralFunction<T>> {
    SpectralGrid::new(rule.clone(), degree)?.analyze(values, basis)
}

/// Projection together with the L² norm of what the projection discards,
/// measured on the same rule.
#[derive(Debug, Clone)]
pub struct Analysis<T> {
    pub function: SpectralFunction<T>,
    pub discarded_norm: T,
}

pub fn analyze_with_report<T: Real>(
    values: &[T],
    rule: &QuadratureRule<T>,
    degree: usize,
    basis: Basis<T>,
) -> Result<Analysis<T>> {
    let grid = SpectralGrid::new(rule.clone(), degree)?;
    let function = grid.analyze(values, basis)?;
    let back = grid.synthesize(&function)?;
    let resid: Vec<T> = values.iter().zip(&back).map(|(&a, &b)| (a - b) * (a - b)).collect();
    let discarded_norm = rule.integrate(&resid).max(T::zero()).sqrt();
    Ok(Analysis { function, discarded_norm })
}

pub fn integrate<T: Real>(values: &[T], rule: &QuadratureRule<T>) -> T {
    rule.integrate(values)
}

/// Oversampling factor of the positivity check grid.
pub const POSITIVITY_OVERSAMPLE: usize = 4;

/// Minimum of u over the 4×-oversampled node set plus, for zonal functions,
/// both poles of the axis.
pub fn min_on_check_grid<T: Real>(u: &SpectralFunction<T>) -> T {
    let grid = SpectralGrid::oversampled(u.dim(), u.degree(), POSITIVITY_OVERSAMPLE);
    min_on_grid(u, &grid)
}

pub fn min_on_grid<T: Real>(u: &SpectralFunction<T>, grid: &SpectralGrid<T>) -> T {
    let vals = grid.synthesize(u).expect("dimension checked by caller");
    let mut m = vals.into_iter().fold(T::infinity(), T::min);
    if let Basis::Zonal { .. } = u.basis() {
        m = m.min(u.eval_zonal(T::one())).min(u.eval_zonal(-T::one()));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereMeasure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_fn(rng: &mut ChaCha8Rng, basis: Basis<f64>, degree: usize) -> SpectralFunction<f64> {
        let len = basis.len_for_degree(degree);
        SpectralFunction::new(basis, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn synth_then_analyze_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for basis in [Basis::Circle, Basis::zonal(3, SpherePoint::north(3)).unwrap(), Basis::zonal(5, SpherePoint::north(5)).unwrap()] {
            let n = basis.dim();
            let grid = SpectralGrid::new(QuadratureRule::for_degree(n, 20, 1), 20).unwrap();
            let u = random_fn(&mut rng, basis.clone(), 20);
            let v = grid.analyze(&grid.synthesize(&u).unwrap(), basis).unwrap();
            for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn insufficient_nodes_rejected() {
        let rule = QuadratureRule::<f64>::circle(41);
        assert!(matches!(SpectralGrid::new(rule, 20), Err(Error::InsufficientNodes { .. })));
        let rule = QuadratureRule::<f64>::zonal(3, 10).unwrap();
        assert!(matches!(SpectralGrid::new(rule, 10), Err(Error::InsufficientNodes { .. })));
    }

    #[test]
    fn constant_on_s3() {
        let rule = QuadratureRule::<f64>::zonal(3, 9).unwrap();
        let f = analyze(&vec![1.0; 9], &rule, 8, Basis::zonal(3, SpherePoint::north(3)).unwrap()).unwrap();
        assert!((f.coeffs()[0] - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!(f.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn degree_above_truncation_is_not_aliased_by_gauss_rule() {
        // K = L+2 Gauss nodes integrate degree 2L+3 exactly, so Y_{L+1} is orthogonal
        // to every retained basis function on the rule.
        let l = 12;
        let basis = Basis::zonal(3, SpherePoint::north(3)).unwrap();
        let rule = QuadratureRule::<f64>::zonal(3, l + 2).unwrap();
        let hi = SpectralFunction::harmonic(basis.clone(), l + 1, l + 1);
        let vals: Vec<f64> = rule.nodes().iter().map(|&t| hi.eval_zonal(t)).collect();
        let rep = analyze_with_report(&vals, &rule, l, basis).unwrap();
        assert!(rep.function.coeffs().iter().all(|c| c.abs() < 1e-12));
        assert!(rep.discarded_norm > 0.5, "the discarded content must be flagged");
    }

    #[test]
    fn integrate_constants() {
        for n in [1usize, 3, 5] {
            let rule = QuadratureRule::<f64>::for_degree(n, 10, 1);
            let mu = SphereMeasure::<f64>::new(n).total;
            let s = integrate(&vec![1.0; rule.len()], &rule);
            assert!(((s - mu) / mu).abs() < 1e-12);
        }
    }

    #[test]
    fn t_squared_on_s3() {
        // ∫_{S^3} t² = 4π ∫ t²√(1-t²) dt = 4π · π/8 = π²/2 = μ(S^3)/4
        let rule = QuadratureRule::<f64>::zonal(3, 6).unwrap();
        let vals: Vec<f64> = rule.nodes().iter().map(|t| t * t).collect();
        assert!((integrate(&vals, &rule) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn positivity_grid_sees_poles() {
        let basis = Basis::zonal(3, SpherePoint::north(3)).unwrap();
        // 1 - t vanishes only at the axis
        let u = SpectralFunction::constant(basis.clone(), 1, 1.0)
            .axpy(-1.0 / (2.0 / (2.0 * PI * PI).sqrt()), &SpectralFunction::harmonic(basis, 1, 1))
            .unwrap();
        assert!(min_on_check_grid(&u).abs() < 1e-12);
    }
}
