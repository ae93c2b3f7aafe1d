//! A small language for coordinate-dependent forms on one chart of `R^6`:
//! expression coefficients, a parser for the `.form` text format, symbolic
//! differentiation and exact-when-possible evaluation.

mod exact;
pub mod expr;
mod form_field;
mod parser;

pub use exact::{parse_pi_rational, PiRational};
pub use expr::Expr;
pub use form_field::{FieldValue, FormField, Point, CHART_DIM};
pub use parser::{parse_expr, parse_field};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormlangError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown coordinate {name:?} at {line}:{col} (coordinates are 1..6)")]
    UnknownCoordinate { name: String, line: usize, col: usize },
    #[error("term at {line}:{col} has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("division by zero in {0}")]
    DivisionByZero(String),
    #[error("square root of a negative number in {0}")]
    NegativeSqrt(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

#[cfg(test)]
mod tests;
