//! Characteristic varieties and covector-level classification.

pub mod char_variety;
pub mod cone;
pub mod definiteness;
pub mod elliptic;
pub mod grid;
pub mod hyperbolic;
pub mod mixed;
pub mod product;
pub mod restrict;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::jet::JetError;

pub use char_variety::{characteristic_ideal, CharVariety};
pub use cone::{ConeKind, ConeSpec};
pub use elliptic::{is_elliptic, EllipticityReport};
pub use grid::CovectorSample;
pub use hyperbolic::{is_hyperbolic, HyperbolicStatus, HyperbolicityReport};
pub use mixed::{classify_mixed, ClassificationReport, Label, Region, SignCondition, StratumKind};
pub use product::{
    external_product, external_product_char, factorization_check, FactorizationReport,
    KunnethReport,
};
pub use restrict::{noncharacteristic_restrict, RestrictionReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MicrolocalError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
