//! Points on S^n, stereographic charts, and the conformal self-maps used
//! throughout the crate.
//!
//! Everything lives in the ambient space R^{n+1}. A point of the sphere is a
//! [`SpherePoint`]; the chart π_ξ sends S^n \ {ξ} to the hyperplane ξ^⊥,
//! expressed in a deterministic orthonormal frame (see [`perp_frame`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{gamma_half, Real};

/// Distance below which a point is treated as the projection pole.
pub const POLE_TOLERANCE: f64 = 1e-8;

pub(crate) fn unit_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// A unit vector in R^{n+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Real> TryFrom<Vec<T>> for SpherePoint<T> {
    type Error = Error;

    fn try_from(coords: Vec<T>) -> Result<Self> {
        Self::new(coords)
    }
}

impl<T: Real> From<SpherePoint<T>> for Vec<T> {
    fn from(p: SpherePoint<T>) -> Self {
        p.coords
    }
}

impl<T: Real> SpherePoint<T> {
    /// Wraps coordinates that are already unit length (within 1e-12).
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument("a sphere point needs at least 2 coordinates".into()));
        }
        let r = norm(&coords);
        if !r.is_finite() || (r - T::one()).abs() > unit_tolerance::<T>() {
            return Err(Error::InvalidArgument(format!("point has norm {r}, expected 1")));
        }
        Ok(Self { coords })
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        let r = norm(&coords);
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c = *c / r);
        Self::new(coords)
    }

    pub(crate) fn from_raw_unchecked(coords: Vec<T>) -> Self {
        Self { coords }
    }

    /// The north pole e_{n+1} of S^n.
    pub fn north(n: usize) -> Self {
        let mut coords = vec![T::zero(); n + 1];
        coords[n] = T::one();
        Self { coords }
    }

    pub fn south(n: usize) -> Self {
        Self::north(n).antipode()
    }

    /// Standard basis vector e_{i+1} (zero-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![T::zero(); n + 1];
        coords[i] = T::one();
        Self { coords }
    }

    /// The point (cos θ, sin θ) of S^1.
    pub fn on_circle(theta: T) -> Self {
        Self { coords: vec![theta.cos(), theta.sin()] }
    }

    /// Point at polar angle `psi` from `axis`, tilted towards the first
    /// frame vector of axis^⊥.
    pub fn at_polar_angle(axis: &SpherePoint<T>, psi: T) -> Self {
        let e = &perp_frame(axis)[0];
        let (s, c) = psi.sin_cos();
        let coords = axis.coords.iter().zip(e).map(|(&a, &b)| c * a + s * b).collect();
        Self { coords }
    }

    /// Point t·axis + √(1-t²)·e with e the first frame vector of axis^⊥.
    pub fn with_axial_component(axis: &SpherePoint<T>, t: T) -> Self {
        let t = t.max(-T::one()).min(T::one());
        let s = ((T::one() - t) * (T::one() + t)).sqrt();
        let e = &perp_frame(axis)[0];
        let coords = axis.coords.iter().zip(e).map(|(&a, &b)| t * a + s * b).collect();
        Self { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Dimension n of the sphere the point lives on.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &SpherePoint<T>) -> T {
        dot(&self.coords, &other.coords)
    }

    pub fn antipode(&self) -> Self {
        Self { coords: self.coords.iter().map(|&c| -c).collect() }
    }

    /// Geodesic distance.
    pub fn angle_to(&self, other: &SpherePoint<T>) -> T {
        // atan2 form is accurate near 0 and π
        let d = self.dot(other);
        let cross_sq = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| {
                let x = a - d * b;
                x * x
            })
            .fold(T::zero(), |acc, x| acc + x);
        cross_sq.sqrt().atan2(d)
    }

    /// θ of a point on S^1 in [0, 2π).
    pub fn circle_angle(&self) -> T {
        let th = self.coords[1].atan2(self.coords[0]);
        if th < T::zero() {
            th + T::PI() + T::PI()
        } else {
            th
        }
    }
}

/// Orthonormal frame of ξ^⊥: Gram–Schmidt on the standard basis with the
/// axis of ξ's largest-magnitude component dropped.
pub fn perp_frame<T: Real>(xi: &SpherePoint<T>) -> Vec<Vec<T>> {
    let dim = xi.coords.len();
    let drop = (0..dim)
        .max_by(|&i, &j| xi.coords[i].abs().partial_cmp(&xi.coords[j].abs()).unwrap())
        .unwrap_or(0);
    let mut frame: Vec<Vec<T>> = Vec::with_capacity(dim - 1);
    for i in (0..dim).filter(|&i| i != drop) {
        let mut v = vec![T::zero(); dim];
        v[i] = T::one();
        // two passes keep the frame orthonormal to working precision
        for _ in 0..2 {
            let c = dot(&v, &xi.coords);
            v.iter_mut().zip(&xi.coords).for_each(|(x, &a)| *x = *x - c * a);
            for f in &frame {
                let c = dot(&v, f);
                v.iter_mut().zip(f).for_each(|(x, &b)| *x = *x - c * b);
            }
        }
        let r = norm(&v);
        v.iter_mut().for_each(|x| *x = *x / r);
        frame.push(v);
    }
    frame
}

/// π_ξ(ζ) in the coordinates of [`perp_frame`].
pub fn stereographic_project<T: Real>(xi: &SpherePoint<T>, zeta: &SpherePoint<T>) -> Result<Vec<T>> {
    check_same_dim(xi, zeta)?;
    if xi.angle_to(zeta) <= T::lit(POLE_TOLERANCE) {
        return Err(Error::PoleSingularity { tolerance: POLE_TOLERANCE });
    }
    let t = xi.dot(zeta);
    let denom = T::one() - t;
    Ok(perp_frame(xi)
        .iter()
        .map(|e| dot(e, &zeta.coords) / denom)
        .collect())
}

/// π_ξ^{-1}(x) for frame coordinates x.
pub fn stereographic_inverse<T: Real>(xi: &SpherePoint<T>, x: &[T]) -> Result<SpherePoint<T>> {
    if x.len() != xi.dim() {
        return Err(Error::DimensionMismatch { expected: xi.dim(), got: x.len() });
    }
    let r2 = dot(x, x);
    let two = T::lit(2.0);
    let mut coords: Vec<T> = if r2.is_finite() {
        let d = r2 + T::one();
        let mut c: Vec<T> = xi.coords.iter().map(|&a| (r2 - T::one()) / d * a).collect();
        for (e, &xk) in perp_frame(xi).iter().zip(x) {
            c.iter_mut().zip(e).for_each(|(ci, &ei)| *ci = *ci + two * xk / d * ei);
        }
        c
    } else {
        xi.coords.clone()
    };
    let r = norm(&coords);
    coords.iter_mut().for_each(|c| *c = *c / r);
    Ok(SpherePoint { coords })
}

fn check_same_dim<T: Real>(a: &SpherePoint<T>, b: &SpherePoint<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Total measure of S^n and the volume of the unit ball in R^n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMeasure<T> {
    pub n: usize,
    pub total: T,
    pub ball_volume: T,
}

impl<T: Real> SphereMeasure<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "sphere dimension must be at least 1");
        let pi = T::PI();
        // μ(S^n) = 2π^{(n+1)/2} / Γ((n+1)/2), ω_n = π^{n/2} / Γ(n/2 + 1)
        let total = T::lit(2.0) * pi.powf(T::from_usize_lossy(n + 1) / T::lit(2.0)) / gamma_half::<T>(n + 1);
        let ball_volume = pi.powf(T::from_usize_lossy(n) / T::lit(2.0)) / gamma_half::<T>(n + 2);
        Self { n, total, ball_volume }
    }
}

/// Conformal self-maps of S^n.
#[derive(Debug, Clone, PartialEq)]
pub enum MobiusMap<T> {
    /// σ_{ξ,λ}(ζ) = π_ξ^{-1}(λ π_ξ(ζ)).
    AxisDilation { axis: SpherePoint<T>, scale: T },
    /// The ball map σ_a, |a| < 1, restricted to the sphere.
    BallPoint { a: Vec<T> },
    /// Orthogonal matrix acting on R^{n+1}, row-major.
    Rotation { matrix: Vec<T>, size: usize },
}

impl<T: Real> MobiusMap<T> {
    pub fn axis_dilation(axis: SpherePoint<T>, scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("dilation scale must be positive, got {scale}")));
        }
        Ok(Self::AxisDilation { axis, scale })
    }

    pub fn ball_point(a: Vec<T>) -> Result<Self> {
        let r = norm(&a);
        if !(r < T::one()) {
            return Err(Error::InvalidArgument(format!("ball point must satisfy |a| < 1, got {r}")));
        }
        Ok(Self::BallPoint { a })
    }

    pub fn rotation(matrix: Vec<T>, size: usize) -> Result<Self> {
        if matrix.len() != size * size {
            return Err(Error::DimensionMismatch { expected: size * size, got: matrix.len() });
        }
        let tol = unit_tolerance::<T>();
        for i in 0..size {
            for j in 0..size {
                let rtr = (0..size).fold(T::zero(), |acc, k| acc + matrix[k * size + i] * matrix[k * size + j]);
                let target = if i == j { T::one() } else { T::zero() };
                if (rtr - target).abs() > tol {
                    return Err(Error::InvalidArgument("rotation matrix is not orthogonal".into()));
                }
            }
        }
        Ok(Self::Rotation { matrix, size })
    }

    /// Planar rotation of S^1 by angle `theta`.
    pub fn circle_rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::Rotation { matrix: vec![c, -s, s, c], size: 2 }
    }

    pub fn identity(n: usize) -> Self {
        Self::AxisDilation { axis: SpherePoint::north(n), scale: T::one() }
    }

    /// Axis-dilation form of a ball map, or `None` for a = 0.
    pub fn ball_as_dilation(a: &[T]) -> Option<(SpherePoint<T>, T)> {
        let r = norm(a);
        if r == T::zero() {
            return None;
        }
        let axis = SpherePoint::from_raw_unchecked(a.iter().map(|&x| x / r).collect());
        Some((axis, (T::one() - r) / (T::one() + r)))
    }

    pub fn apply(&self, zeta: &SpherePoint<T>) -> SpherePoint<T> {
        match self {
            Self::AxisDilation { axis, scale } => dilate(axis, *scale, zeta),
            Self::BallPoint { a } => {
                let a2 = dot(a, a);
                let az = dot(a, &zeta.coords);
                let z2 = dot(&zeta.coords, &zeta.coords);
                let den = a2 * z2 - T::lit(2.0) * az + T::one();
                let lin = z2 - T::lit(2.0) * az + T::one();
                let mut coords: Vec<T> = zeta
                    .coords
                    .iter()
                    .zip(a)
                    .map(|(&z, &ai)| ((T::one() - a2) * z - lin * ai) / den)
                    .collect();
                let r = norm(&coords);
                coords.iter_mut().for_each(|c| *c = *c / r);
                SpherePoint { coords }
            }
            Self::Rotation { matrix, size } => {
                let coords = (0..*size)
                    .map(|i| dot(&matrix[i * size..(i + 1) * size], &zeta.coords))
                    .collect();
                SpherePoint { coords }
            }
        }
    }

    /// Volume factor J_φ(ζ), the n-th power of the conformal factor.
    pub fn jacobian(&self, zeta: &SpherePoint<T>) -> T {
        let n = zeta.dim() as i32;
        match self {
            Self::AxisDilation { axis, scale } => dilation_factor(axis, *scale, zeta).powi(n),
            Self::BallPoint { a } => {
                let a2 = dot(a, a);
                let diff2 = zeta
                    .coords
                    .iter()
                    .zip(a)
                    .fold(T::zero(), |acc, (&z, &ai)| acc + (z - ai) * (z - ai));
                ((T::one() - a2) / diff2).powi(n)
            }
            Self::Rotation { .. } => T::one(),
        }
    }

    /// Composition `self ∘ other` of two dilations about the same axis.
    pub fn compose(&self, other: &MobiusMap<T>) -> Result<MobiusMap<T>> {
        match (self, other) {
            (Self::AxisDilation { axis: a1, scale: l1 }, Self::AxisDilation { axis: a2, scale: l2 }) => {
                let mismatch = a1
                    .coords
                    .iter()
                    .zip(&a2.coords)
                    .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()));
                if a1.dim() != a2.dim() || mismatch > unit_tolerance::<T>() {
                    return Err(Error::AxisMismatch { mismatch: mismatch.to_f64_lossy() });
                }
                Ok(Self::AxisDilation { axis: a1.clone(), scale: *l1 * *l2 })
            }
            _ => Err(Error::InvalidArgument("composition is defined for same-axis dilations only".into())),
        }
    }

    /// For maps that preserve functions zonal about `axis`: the axis and
    /// dilation factor, with ball points converted. Rotations are rejected.
    pub(crate) fn as_axis_dilation(&self) -> Option<(SpherePoint<T>, T)> {
        match self {
            Self::AxisDilation { axis, scale } => Some((axis.clone(), *scale)),
            Self::BallPoint { a } => Self::ball_as_dilation(a),
            Self::Rotation { .. } => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Self::AxisDilation { scale, .. } => *scale == T::one(),
            Self::BallPoint { a } => a.iter().all(|&x| x == T::zero()),
            Self::Rotation { matrix, size } => (0..*size).all(|i| {
                (0..*size).all(|j| matrix[i * size + j] == if i == j { T::one() } else { T::zero() })
            }),
        }
    }
}

fn dilate<T: Real>(axis: &SpherePoint<T>, scale: T, zeta: &SpherePoint<T>) -> SpherePoint<T> {
    // closed form of π^{-1}(λπ(ζ)) that stays finite at ζ = ξ
    let t = axis.dot(zeta);
    let lam2 = scale * scale;
    let (p, m) = (T::one() + t, T::one() - t);
    let den = lam2 * p + m;
    let along = (lam2 * p - m) / den;
    let across = T::lit(2.0) * scale / den;
    let mut coords: Vec<T> = zeta
        .coords
        .iter()
        .zip(&axis.coords)
        .map(|(&z, &a)| across * (z - t * a) + along * a)
        .collect();
    let r = norm(&coords);
    coords.iter_mut().for_each(|c| *c = *c / r);
    SpherePoint { coords }
}

/// Conformal factor λ(1+|π_ξ|²)/(1+λ²|π_ξ|²), rewritten in t = ζ·ξ.
fn dilation_factor<T: Real>(axis: &SpherePoint<T>, scale: T, zeta: &SpherePoint<T>) -> T {
    let t = axis.dot(zeta);
    T::lit(2.0) * scale / ((T::one() - t) + scale * scale * (T::one() + t))
}
