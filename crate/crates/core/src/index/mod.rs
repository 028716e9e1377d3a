//! Euler characteristics, characteristic-class integrals and family indices.

pub mod classes;
pub mod engine;
pub mod model;
pub mod series;

use thiserror::Error;

use crate::jet::JetError;
use crate::microlocal::MicrolocalError;

pub use classes::{
    chern_character, chern_character_from_classes, line_bundle, tangent_todd, todd_class,
    todd_from_chern_classes, SymbolClass,
};
pub use engine::{
    additivity_check, atiyah_singer_index, boundary_index, fiberwise_index, grr_index,
    spencer_euler_characteristic, strand_euler_characteristic, twisted_index, Fiber, IndexMethod,
    IndexReport,
};
pub use model::{CharacterClass, CohomologyRingModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Microlocal(#[from] MicrolocalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}
