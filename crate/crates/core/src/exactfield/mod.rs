//! Exact arithmetic in relative number-field towers over Q.
//!
//! A field is presented as a chain Q = K_0 ⊂ K_1 ⊂ … ⊂ K_d where each step
//! adjoins a root of a monic polynomial whose coefficients are algebraic
//! integers of the previous step. Elements are stored in the flattened power
//! basis: a vector of integer numerators over one positive common denominator.

mod element;
mod field;
mod gauss;
pub mod linalg;
mod residue;

pub use element::{parse_rational, rational_to_string, FieldElement};
pub use field::{Automorphism, Field};
pub use gauss::GaussRational;
pub use residue::{LocalPrimeData, PrimeSpec, ResidueField};
pub(crate) use residue::is_prime;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field mismatch: {0} vs {1}")]
    Mismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a subfield of {1}")]
    NotSubfield(String, String),
    #[error("element does not lie in subfield {0}")]
    NotInSubfield(String),
    #[error("element is not integral at prime {0}")]
    NotIntegralAtPrime(String),
    #[error("wrong basis length: expected {expected}, got {got}")]
    BasisLength { expected: usize, got: usize },
    #[error("field {0} has no relative Galois generator")]
    NoGenerator(String),
    #[error("unknown automorphism {0}")]
    UnknownAutomorphism(String),
    #[error("invalid field data: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// Arithmetic operation selector for [`Field::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}
