//! Symbolic and numeric toolkit for linear PDE systems: formal integrability,
//! microlocal classification, index formulas and analytic torsion.

pub mod algebra;
pub mod dispatch;
pub mod dsl;
pub mod index;
pub mod jet;
pub mod microlocal;
pub mod report;
pub mod torsion;

pub use num_rational::BigRational;

/// Exact scalar used by every symbolic computation.
pub type Rational = BigRational;
/// Polynomials with exact rational coefficients.
pub type QPoly = algebra::MultiPoly<Rational>;
pub type FPoly = algebra::MultiPoly<f64>;
pub type QMatrix = algebra::Matrix<Rational>;
pub type FMatrix = algebra::Matrix<f64>;
pub type F32Matrix = algebra::Matrix<f32>;
pub type QIdeal = algebra::PolyIdeal<Rational>;
