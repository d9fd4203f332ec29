//! Quadrature rules for ∫_{S^n} f dμ.
//!
//! On S^1 the rule is the equispaced θ-grid. For n ≥ 2, zonal integrands
//! reduce to ∫_{-1}^{1} f(t) (1-t²)^{(n-2)/2} dt times |S^{n-1}|, which is
//! integrated with Gauss–Jacobi nodes found by Newton's method on the
//! orthonormal three-term recurrence.

use crate::error::{Error, Result};
use crate::geometry::{SphereMeasure, SpherePoint};
use crate::scalar::Real;

/// Orthonormal zonal Gegenbauer basis on S^n (n ≥ 2): Y_α(t) is a multiple of
/// C_α^{((n-1)/2)}(t) with ∫_{S^n} Y_α(ζ·ξ)² dμ(ζ) = 1.
#[derive(Debug, Clone)]
pub struct ZonalBasis<T> {
    n: usize,
    y0: T,
}

impl<T: Real> ZonalBasis<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "zonal basis needs n >= 2");
        let y0 = T::one() / SphereMeasure::<T>::new(n).total.sqrt();
        Self { n, y0 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Off-diagonal Jacobi coefficient b_k of t·Y_k = b_{k+1}Y_{k+1} + b_k Y_{k-1}.
    fn b(&self, k: usize) -> T {
        // b_k² = k(k+2λ-1) / (4(k+λ)(k+λ-1)), λ = (n-1)/2, written in halves
        let k2 = 2 * k;
        let nn = self.n;
        let num = (k2 * (k2 + 2 * nn - 4)) as f64;
        let den = (4 * (k2 + nn - 1) * (k2 + nn - 3)) as f64;
        T::lit((num / den).sqrt())
    }

    /// Y_0(t), …, Y_L(t).
    pub fn eval_all(&self, t: T, degree: usize, out: &mut Vec<T>) {
        out.clear();
        out.push(self.y0);
        if degree == 0 {
            return;
        }
        let mut prev = T::zero();
        let mut cur = self.y0;
        for k in 0..degree {
            let bk = if k == 0 { T::zero() } else { self.b(k) };
            let next = (t * cur - bk * prev) / self.b(k + 1);
            out.push(next);
            prev = cur;
            cur = next;
        }
    }

    pub fn eval(&self, t: T, degree: usize) -> T {
        self.eval_with_derivative(t, degree).0
    }

    /// Y_L(t) and dY_L/dt by differentiating the recurrence.
    pub fn eval_with_derivative(&self, t: T, degree: usize) -> (T, T) {
        let (mut p_prev, mut p) = (T::zero(), self.y0);
        let (mut d_prev, mut d) = (T::zero(), T::zero());
        for k in 0..degree {
            let bk = if k == 0 { T::zero() } else { self.b(k) };
            let b1 = self.b(k + 1);
            let pn = (t * p - bk * p_prev) / b1;
            let dn = (p + t * d - bk * d_prev) / b1;
            p_prev = p;
            p = pn;
            d_prev = d;
            d = dn;
        }
        (p, d)
    }

    /// Y_α(1): value of the basis function at the axis itself.
    pub fn value_at_pole(&self, degree: usize) -> T {
        self.eval(T::one(), degree)
    }
}

/// Gauss nodes (ascending) and Christoffel weights for the weight
/// |S^{n-1}|·(1-t²)^{(n-2)/2} on [-1, 1]; the weights sum to μ(S^n).
pub fn gauss_zonal<T: Real>(n: usize, k: usize) -> (Vec<T>, Vec<T>) {
    assert!(k >= 1);
    let basis = ZonalBasis::<T>::new(n);
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(4.0));
    let mut roots: Vec<T> = Vec::with_capacity(k);
    // largest root first; each search starts just below the previous root, where
    // Newton on the deflated polynomial converges monotonically
    let offset = T::lit(1e-3) / T::from_usize_lossy(k * k);
    for _ in 0..k {
        let mut x = match roots.last() {
            Some(&prev) => prev - offset,
            None => T::one(),
        };
        for _ in 0..200 {
            let (p, dp) = basis.eval_with_derivative(x, k);
            let defl = roots.iter().fold(T::zero(), |acc, &r| acc + T::one() / (x - r));
            let ratio = p / dp;
            let step = ratio / (T::one() - ratio * defl);
            x = x - step;
            if step.abs() <= tol * (T::one() + x.abs()) {
                break;
            }
        }
        roots.push(x);
    }
    roots.reverse();
    // enforce the exact symmetry of the node set
    for j in 0..k / 2 {
        let avg = (roots[k - 1 - j] - roots[j]) / T::lit(2.0);
        roots[j] = -avg;
        roots[k - 1 - j] = avg;
    }
    if k % 2 == 1 {
        roots[k / 2] = T::zero();
    }
    let mut buf = Vec::with_capacity(k);
    let weights = roots
        .iter()
        .map(|&t| {
            basis.eval_all(t, k - 1, &mut buf);
            T::one() / buf.iter().fold(T::zero(), |acc, &y| acc + y * y)
        })
        .collect();
    (roots, weights)
}

/// Nodes and weights for ∫_{S^n} f dμ.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    n: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Equispaced θ_j = 2πj/K on S^1.
    pub fn circle(k: usize) -> Self {
        assert!(k >= 1);
        let h = T::PI() * T::lit(2.0) / T::from_usize_lossy(k);
        Self {
            n: 1,
            nodes: (0..k).map(|j| h * T::from_usize_lossy(j)).collect(),
            weights: vec![h; k],
        }
    }

    /// K Gauss–Jacobi nodes in t = ζ·ξ on S^n, n ≥ 2.
    pub fn zonal(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("zonal quadrature requires n >= 2".into()));
        }
        if k == 0 {
            return Err(Error::InsufficientNodes { nodes: 0, degree: 0 });
        }
        let (nodes, weights) = gauss_zonal(n, k);
        Ok(Self { n, nodes, weights })
    }

    /// Minimal rule that analyzes degree ≤ L exactly, times `oversample`.
    pub fn for_degree(n: usize, degree: usize, oversample: usize) -> Self {
        let f = oversample.max(1);
        if n == 1 {
            Self::circle(f * (2 * degree + 2))
        } else {
            Self::zonal(n, f * (degree + 1)).expect("n >= 2")
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// θ_j on S^1, t_j otherwise.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Largest degree L whose projection this rule computes exactly.
    pub fn max_analysis_degree(&self) -> Option<usize> {
        let k = self.len();
        if self.n == 1 {
            // products of degree ≤ 2L must be integrated exactly; demand K ≥ 2L+2
            (k >= 2).then(|| (k - 2) / 2)
        } else {
            // Gauss exactness 2K-1 ≥ 2L
            (k >= 1).then(|| k - 1)
        }
    }

    pub fn integrate(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.len(), "values must live on the rule nodes");
        self.weights.iter().zip(values).fold(T::zero(), |acc, (&w, &f)| acc + w * f)
    }

    /// The nodes as points of S^n. On S^1 the axis is ignored; for n ≥ 2 the
    /// node t_j is placed at polar angle acos(t_j) from `axis`.
    pub fn points(&self, axis: &SpherePoint<T>) -> Vec<SpherePoint<T>> {
        if self.n == 1 {
            self.nodes.iter().map(|&th| SpherePoint::on_circle(th)).collect()
        } else {
            self.nodes
                .iter()
                .map(|&t| SpherePoint::with_axial_component(axis, t))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_sphere_measure() {
        for n in [2usize, 3, 4, 5, 7] {
            let mu = SphereMeasure::<f64>::new(n).total;
            for k in [1usize, 2, 5, 17, 64, 200] {
                let r = QuadratureRule::<f64>::zonal(n, k).unwrap();
                let s: f64 = r.weights().iter().sum();
                assert!(((s - mu) / mu).abs() < 1e-12, "n={n} k={k}");
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            }
        }
        let c = QuadratureRule::<f64>::circle(10);
        assert!((c.integrate(&[1.0; 10]) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gauss_exactness_on_monomials() {
        // ∫_{S^n} t^{2j} dμ = |S^{n-1}| B(j+1/2, (n-1)/2), via ratios of moments
        for n in [2usize, 3, 5] {
            let k = 12;
            let r = QuadratureRule::<f64>::zonal(n, k).unwrap();
            let mu = SphereMeasure::<f64>::new(n).total;
            let mut expect = mu;
            for j in 0..k {
                let vals: Vec<f64> = r.nodes().iter().map(|t| t.powi(2 * j as i32)).collect();
                let got = r.integrate(&vals);
                assert!(((got - expect) / expect).abs() < 1e-12, "n={n} j={j}");
                // moment recursion M_{j+1} = M_j (2j+1)/(2j+n+1)
                expect *= (2 * j + 1) as f64 / (2 * j + n + 1) as f64;
                let odd: Vec<f64> = r.nodes().iter().map(|t| t.powi(2 * j as i32 + 1)).collect();
                assert!(r.integrate(&odd).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn legendre_nodes_known_values() {
        let (x, w) = gauss_zonal::<f64>(2, 3);
        let s = (0.6f64).sqrt();
        assert!((x[0] + s).abs() < 1e-15 && x[1] == 0.0 && (x[2] - s).abs() < 1e-15);
        // Legendre weights 5/9, 8/9, 5/9 scaled by |S^1| = 2π
        assert!((w[1] - 2.0 * PI * 8.0 / 9.0).abs() < 1e-13);
        assert!((w[0] - 2.0 * PI * 5.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [2usize, 3, 6] {
            let r = QuadratureRule::<f64>::zonal(n, 40).unwrap();
            let b = ZonalBasis::<f64>::new(n);
            let mut buf = Vec::new();
            let table: Vec<Vec<f64>> = r
                .nodes()
                .iter()
                .map(|&t| {
                    b.eval_all(t, 30, &mut buf);
                    buf.clone()
                })
                .collect();
            for a in 0..=30 {
                for c in 0..=30 {
                    let vals: Vec<f64> = table.iter().map(|row| row[a] * row[c]).collect();
                    let ip = r.integrate(&vals);
                    let target = if a == c { 1.0 } else { 0.0 };
                    assert!((ip - target).abs() < 1e-12, "n={n} ({a},{c}) -> {ip}");
                }
            }
        }
    }

    #[test]
    fn circle_degree_bound() {
        assert_eq!(QuadratureRule::<f64>::circle(66).max_analysis_degree(), Some(32));
        assert_eq!(QuadratureRule::<f64>::zonal(3, 33).unwrap().max_analysis_degree(), Some(32));
    }

    #[test]
    fn f32_rule() {
        let r = QuadratureRule::<f32>::zonal(3, 20).unwrap();
        let s: f32 = r.weights().iter().sum();
        assert!((s - 2.0 * std::f32::consts::PI.powi(2)).abs() < 1e-4);
    }
}
