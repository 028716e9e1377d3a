//! Exact commutative algebra: fields, polynomials, matrices and ideals.

pub mod field;
pub mod groebner;
pub mod matrix;
pub mod poly;
pub mod ser;
pub mod univariate;

pub use field::{int, parse_rational, rat, rational_string, Field};
pub use groebner::{
    ideal_dimension, ideal_member, AlgebraError, GroebnerBasis, IdealDimension, PolyIdeal,
};
pub use matrix::{Matrix, Rref};
pub use poly::{var_list, Monomial, MonomialOrder, MultiPoly, VarList};
pub use univariate::UniPoly;
