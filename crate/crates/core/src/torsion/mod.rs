//! Zeta-regularized determinants of model Laplacian spectra and the torsion
//! invariants assembled from them.

pub mod crosscheck;
pub mod invariants;
pub mod special;
pub mod spectrum;
pub mod zeta;

use thiserror::Error;

pub use crosscheck::{fd_spectrum_crosscheck, CrosscheckReport};
pub use invariants::{
    bcov_invariant_model, bcov_torsion, l2_covolume, quillen_norm, ray_singer_torsion, DegreeLabel,
    TorsionConvention, TorsionReport,
};
pub use spectrum::{SpectrumKind, SpectrumModel, TorusLaplacian};
pub use zeta::{
    regularized_det, regularized_det_with, zeta_at, zeta_at_with, zeta_at_zero, zeta_at_zero_with,
    DetReport, ZetaMethod, ZetaValue,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorsionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("pole at s = {s} with residue {residue}")]
    Pole { s: f64, residue: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
