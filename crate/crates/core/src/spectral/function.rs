use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unit_tolerance, SpherePoint};
use crate::scalar::Real;
use crate::spectral::quadrature::ZonalBasis;

/// Which orthonormal basis the coefficients refer to.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis<T> {
    /// Full Fourier basis on S^1: 1/√(2π), cos kθ/√π, sin kθ/√π.
    Circle,
    /// Zonal Gegenbauer functions of t = ζ·axis on S^dim, dim ≥ 2.
    Zonal { dim: usize, axis: SpherePoint<T> },
}

impl<T: Real> Basis<T> {
    pub fn zonal(dim: usize, axis: SpherePoint<T>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("zonal representation requires n >= 2; use Circle on S^1".into()));
        }
        if axis.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: axis.dim() });
        }
        Ok(Self::Zonal { dim, axis })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Circle => 1,
            Self::Zonal { dim, .. } => *dim,
        }
    }

    /// Number of coefficients needed for degrees 0..=L.
    pub fn len_for_degree(&self, degree: usize) -> usize {
        match self {
            Self::Circle => 2 * degree + 1,
            Self::Zonal { .. } => degree + 1,
        }
    }

    /// Spherical-harmonic degree of coefficient `idx`.
    pub fn degree_of(&self, idx: usize) -> usize {
        match self {
            Self::Circle => idx.div_ceil(2),
            Self::Zonal { .. } => idx,
        }
    }

    /// Axis for zonal bases, the north pole on S^1.
    pub fn axis(&self) -> SpherePoint<T> {
        match self {
            Self::Circle => SpherePoint::north(1),
            Self::Zonal { axis, .. } => axis.clone(),
        }
    }

    pub(crate) fn same_as(&self, other: &Basis<T>) -> Result<()> {
        match (self, other) {
            (Self::Circle, Self::Circle) => Ok(()),
            (Self::Zonal { dim: d1, axis: a1 }, Self::Zonal { dim: d2, axis: a2 }) => {
                if d1 != d2 {
                    return Err(Error::DimensionMismatch { expected: *d1, got: *d2 });
                }
                let mismatch = a1
                    .coords()
                    .iter()
                    .zip(a2.coords())
                    .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()));
                if mismatch > unit_tolerance::<T>() {
                    return Err(Error::AxisMismatch { mismatch: mismatch.to_f64_lossy() });
                }
                Ok(())
            }
            _ => Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() }),
        }
    }
}

/// A band-limited function on S^n stored as coefficients in an orthonormal
/// basis of L²(μ_{S^n}).
///
/// Circle coefficients are interleaved by degree: `[a_0, a_1, b_1, …, a_L, b_L]`
/// with a_k multiplying cos kθ/√π and b_k multiplying sin kθ/√π.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction<T> {
    basis: Basis<T>,
    coeffs: Vec<T>,
}

impl<T: Real> SpectralFunction<T> {
    pub fn new(basis: Basis<T>, coeffs: Vec<T>) -> Result<Self> {
        let ok_len = match basis {
            Basis::Circle => coeffs.len() % 2 == 1,
            Basis::Zonal { .. } => !coeffs.is_empty(),
        };
        if !ok_len {
            return Err(Error::InvalidArgument(format!("{} coefficients do not form a full degree range", coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self { basis, coeffs })
    }

    /// Circle function from cosine coefficients a_0..a_L and sine b_1..b_L.
    pub fn circle(cos: &[T], sin: &[T]) -> Result<Self> {
        if cos.is_empty() || sin.len() + 1 != cos.len() {
            return Err(Error::InvalidArgument("need a_0..a_L and b_1..b_L".into()));
        }
        let mut coeffs = vec![cos[0]];
        for (a, b) in cos[1..].iter().zip(sin) {
            coeffs.push(*a);
            coeffs.push(*b);
        }
        Self::new(Basis::Circle, coeffs)
    }

    pub fn zonal(dim: usize, axis: SpherePoint<T>, coeffs: Vec<T>) -> Result<Self> {
        Self::new(Basis::zonal(dim, axis)?, coeffs)
    }

    pub fn zeros(basis: Basis<T>, degree: usize) -> Self {
        let len = basis.len_for_degree(degree);
        Self { basis, coeffs: vec![T::zero(); len] }
    }

    /// The constant function `value`.
    pub fn constant(basis: Basis<T>, degree: usize, value: T) -> Self {
        let mut f = Self::zeros(basis, degree);
        let mu = crate::geometry::SphereMeasure::<T>::new(f.dim()).total;
        f.coeffs[0] = value * mu.sqrt();
        f
    }

    /// Unit-norm basis element at coefficient index `idx`.
    pub fn basis_element(basis: Basis<T>, degree: usize, idx: usize) -> Self {
        let mut f = Self::zeros(basis, degree);
        f.coeffs[idx] = T::one();
        f
    }

    /// Unit-norm degree-α element (the cosine one on S^1).
    pub fn harmonic(basis: Basis<T>, degree: usize, alpha: usize) -> Self {
        let idx = match basis {
            Basis::Circle => if alpha == 0 { 0 } else { 2 * alpha - 1 },
            Basis::Zonal { .. } => alpha,
        };
        Self::basis_element(basis, degree.max(alpha), idx)
    }

    pub fn basis(&self) -> &Basis<T> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Truncation degree L.
    pub fn degree(&self) -> usize {
        self.basis.degree_of(self.coeffs.len() - 1)
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.basis.degree_of(idx)
    }

    /// Same function, truncated or zero-padded to degree L.
    pub fn with_degree(&self, degree: usize) -> Self {
        let len = self.basis.len_for_degree(degree);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, T::zero());
        Self { basis: self.basis.clone(), coeffs }
    }

    /// Coefficient-wise scaling by a per-degree factor.
    pub fn map_degrees(&self, mut f: impl FnMut(usize) -> T) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * f(self.basis.degree_of(i)))
            .collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// `self + s·other`, padding to the larger degree.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.basis.same_as(&other.basis)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(T::zero());
                let b = other.coeffs.get(i).copied().unwrap_or(T::zero());
                a + s * b
            })
            .collect();
        Ok(Self { basis: self.basis.clone(), coeffs })
    }

    /// L²(μ) inner product, i.e. the coefficient dot product.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.basis.same_as(&other.basis)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    /// Σ_idx w(deg)·a_idx·b_idx for a per-degree weight.
    pub fn weighted_inner(&self, other: &Self, mut w: impl FnMut(usize) -> T) -> Result<T> {
        self.basis.same_as(&other.basis)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .fold(T::zero(), |acc, (i, (&a, &b))| acc + w(self.basis.degree_of(i)) * a * b))
    }

    pub fn norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt()
    }

    /// Mean value over the sphere.
    pub fn mean(&self) -> T {
        let mu = crate::geometry::SphereMeasure::<T>::new(self.dim()).total;
        self.coeffs[0] / mu.sqrt()
    }

    /// Point value on S^1 at angle θ.
    pub fn eval_circle(&self, theta: T) -> T {
        debug_assert!(matches!(self.basis, Basis::Circle));
        let pi = T::PI();
        let c0 = T::one() / (pi + pi).sqrt();
        let ck = T::one() / pi.sqrt();
        let mut acc = self.coeffs[0] * c0;
        for k in 1..=self.degree() {
            let (s, c) = (theta * T::from_usize_lossy(k)).sin_cos();
            acc = acc + ck * (self.coeffs[2 * k - 1] * c + self.coeffs[2 * k] * s);
        }
        acc
    }

    /// k-th θ-derivative on S^1.
    pub fn circle_derivative(&self, order: usize) -> Result<Self> {
        if !matches!(self.basis, Basis::Circle) {
            return Err(Error::InvalidArgument("θ-derivatives are defined for circle functions".into()));
        }
        let mut out = self.clone();
        for _ in 0..order {
            let prev = out.coeffs.clone();
            out.coeffs[0] = T::zero();
            for k in 1..=out.degree() {
                let kk = T::from_usize_lossy(k);
                // d/dθ (a cos + b sin) = k b cos − k a sin
                out.coeffs[2 * k - 1] = kk * prev[2 * k];
                out.coeffs[2 * k] = -kk * prev[2 * k - 1];
            }
        }
        Ok(out)
    }

    /// Point value of a zonal function at t = ζ·axis.
    pub fn eval_zonal(&self, t: T) -> T {
        match &self.basis {
            Basis::Zonal { dim, .. } => {
                let mut buf = Vec::with_capacity(self.coeffs.len());
                ZonalBasis::<T>::new(*dim).eval_all(t, self.degree(), &mut buf);
                buf.iter().zip(&self.coeffs).fold(T::zero(), |acc, (&y, &c)| acc + y * c)
            }
            Basis::Circle => panic!("eval_zonal on a circle function"),
        }
    }

    /// Point value at ζ ∈ S^n.
    pub fn eval(&self, zeta: &SpherePoint<T>) -> Result<T> {
        if zeta.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: zeta.dim() });
        }
        Ok(match &self.basis {
            Basis::Circle => self.eval_circle(zeta.circle_angle()),
            Basis::Zonal { axis, .. } => self.eval_zonal(axis.dot(zeta)),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    dim: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<Vec<f64>>,
    coeffs: Vec<f64>,
}

impl<T: Real> Serialize for SpectralFunction<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, axis) = match &self.basis {
            Basis::Circle => ("circle", None),
            Basis::Zonal { axis, .. } => ("zonal", Some(axis.coords().iter().map(|c| c.to_f64_lossy()).collect())),
        };
        Wire {
            dim: self.dim(),
            kind: kind.into(),
            axis,
            coeffs: self.coeffs.iter().map(|c| c.to_f64_lossy()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SpectralFunction<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = Wire::deserialize(d)?;
        let coeffs = w.coeffs.iter().map(|&c| T::lit(c)).collect();
        let basis = match (w.kind.as_str(), w.axis) {
            ("circle", _) if w.dim == 1 => Basis::Circle,
            ("zonal", Some(axis)) => {
                let axis = SpherePoint::new(axis.into_iter().map(T::lit).collect()).map_err(D::Error::custom)?;
                Basis::zonal(w.dim, axis).map_err(D::Error::custom)?
            }
            (k, _) => return Err(D::Error::custom(format!("unsupported kind {k:?} for dim {}", w.dim))),
        };
        Self::new(basis, coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_constant_on_circle() {
        let u = SpectralFunction::<f64>::circle(&[(2.0 * PI).sqrt()], &[]).unwrap();
        for th in [0.0, 1.0, 2.5, 6.0] {
            assert!((u.eval_circle(th) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_one_zonal_is_odd() {
        let u = SpectralFunction::<f64>::harmonic(Basis::zonal(3, SpherePoint::north(3)).unwrap(), 1, 1);
        let (p, m) = (u.eval_zonal(1.0), u.eval_zonal(-1.0));
        assert!(p > 0.0);
        assert!((p + m).abs() < 1e-15);
        // ∫_{S^3} t² = μ/4, so Y_1 = 2t/√(2π²)
        assert!((p - 2.0 / (2.0 * PI * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let u = SpectralFunction::<f64>::circle(&[0.0, 0.0], &[PI.sqrt()]).unwrap();
        let d = u.circle_derivative(1).unwrap();
        assert!((d.eval_circle(0.3) - 0.3f64.cos()).abs() < 1e-15);
        let d2 = u.circle_derivative(2).unwrap();
        assert!((d2.eval_circle(0.3) + 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let u = SpectralFunction::<f64>::zonal(3, SpherePoint::north(3), vec![1.0, 0.5]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&u).unwrap();
        assert_eq!(v["dim"], 3);
        assert_eq!(v["kind"], "zonal");
        assert_eq!(v["axis"].as_array().unwrap().len(), 4);
        let back: SpectralFunction<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, u);
        let c = SpectralFunction::<f64>::circle(&[1.0, 2.0], &[3.0]).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert!(v.get("axis").is_none());
        assert_eq!(v["coeffs"], serde_json::json!([1.0, 2.0, 3.0]));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SpectralFunction::<f64>::new(Basis::Circle, vec![1.0, 2.0]).is_err());
        assert!(Basis::<f64>::zonal(1, SpherePoint::north(1)).is_err());
        assert!(SpectralFunction::<f64>::new(Basis::Circle, vec![f64::NAN]).is_err());
        let a = SpectralFunction::<f64>::zonal(3, SpherePoint::north(3), vec![1.0]).unwrap();
        let b = SpectralFunction::<f64>::zonal(3, SpherePoint::basis(3, 0), vec![1.0]).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::AxisMismatch { .. })));
    }
}
