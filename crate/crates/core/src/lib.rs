//! Spectral GJMS operators P_2m on round spheres, the conformal functional
//! I_2m, its Möbius covariance, sharp constants and second-variation
//! stability.
//!
//! Floating code is generic over [`Real`] and exact code over [`Scalar`]; the
//! aliases below fix the common choices.

pub mod error;
pub mod extremize;
pub mod flatcheck;
pub mod functional;
pub mod geometry;
pub mod gjms;
pub mod mobius;
pub mod polyident;
pub mod scalar;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type SpectralFunction64 = spectral::SpectralFunction<f64>;
pub type SpectralFunction32 = spectral::SpectralFunction<f32>;
pub type Basis64 = spectral::Basis<f64>;
pub type SpherePoint64 = geometry::SpherePoint<f64>;
pub type MobiusMap64 = geometry::MobiusMap<f64>;
pub type GreenKernel64 = gjms::GreenKernel<f64>;
pub type EnergyReport64 = functional::EnergyReport<f64>;
pub type DescentTrace64 = extremize::DescentTrace<f64>;
pub type Polynomial64 = polyident::Polynomial<f64>;
pub use polyident::RationalPolynomial;
