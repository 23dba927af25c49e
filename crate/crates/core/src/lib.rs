//! Semidefinite programming upper bounds for codes in spherical caps.
//!
//! The pipeline builds the zonal matrices `Y_k^n`, assembles a
//! sum-of-squares relaxation of the dual program bounding `A(n, theta, phi)`,
//! solves it with an interior point method and re-verifies the solution into
//! a [`certify::BoundCertificate`]. The one-sided kissing number `B(n)` is
//! the case `theta = pi/3`, `phi = pi/2`.
//!
//! Polynomial and zonal code is generic over the coefficient type; the
//! aliases below fix the two instantiations the pipeline uses.

pub mod certify;
pub mod codes;
pub mod conic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod poly;
pub mod relax;
pub mod scalar;
pub mod zonal;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Exact univariate polynomial.
pub type UniPoly = poly::Poly1<Rational>;
/// Exact polynomial in `(u, v, t)`.
pub type TriPoly = poly::Poly3<Rational>;
/// Floating point polynomial in `(u, v, t)`.
pub type TriPolyF64 = poly::Poly3<f64>;
/// Exact (unnormalized) zonal family, the form used to build programs.
pub type ExactFamily = zonal::ZonalFamily<Rational>;
/// Floating point family; the only kind that can carry the `lambda` weights.
pub type FloatFamily = zonal::ZonalFamily<f64>;
/// Exact matrix coefficients.
pub type ExactCoefficients = zonal::MatrixCoefficients<Rational>;
/// Exact spherical code (root systems).
pub type ExactCode = codes::Code<Rational>;
/// Floating point spherical code.
pub type FloatCode = codes::Code<f64>;
