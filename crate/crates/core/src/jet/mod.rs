//! Jet spaces, symbols, the Spencer δ-complex and finite-type reduction.

pub mod finite;
pub mod log_spencer;
pub mod spencer;
pub mod symbol;
pub mod system;

use thiserror::Error;

pub use finite::{
    is_finite_type, solution_dim_bound, to_flat_connection, FiniteTypeReport, FlatConnectionSystem,
};
pub use log_spencer::{build_log_spencer, LogAlgebra, LogSpencerComplex, LogSpencerOptions};
pub use spencer::{
    delta_cohomology, involutivity_degree, poincare_series, CohomologyEntry, DeltaCohomologyTable,
    InvolutivityReport, SpencerComplex, DEFAULT_SEARCH_BOUND,
};
pub use symbol::{geometric_symbol, prolong, symbol_at_degree, symbol_matrix, SymbolSpace};
pub use system::{catalog, Jet, LinearEquation, PdeSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("symbol is degenerate at ({})", point.join(", "))]
    DegenerateSymbol { point: Vec<String> },
    #[error("system is not of finite type within prolongation bound {bound}")]
    NotFiniteType { bound: usize },
    #[error("curvature F_{i}{j} has nonzero entry ({row},{col}): {polynomial}")]
    Obstruction {
        i: usize,
        j: usize,
        row: usize,
        col: usize,
        polynomial: String,
    },
}
