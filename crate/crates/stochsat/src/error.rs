//! Crate-wide error type.
//!
//! The CLI maps these onto exit codes: parse/dimension errors are user input
//! problems (exit 2), configuration and domain-membership errors are exit 3,
//! anything else surfacing at runtime is exit 1.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Syntax or semantic error in the problem DSL, with 1-based position.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A hyper-parameter or option failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A point had the wrong number of coordinates for the problem.
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A candidate point lies outside the deterministic parameter domain.
    #[error("point outside parameter domain: {0}")]
    OutsideDomain(String),

    /// Invalid interval/box construction or a geometric operation that
    /// cannot proceed (NaN endpoint, reversed bounds, degenerate bisection,
    /// sampling from an unbounded interval, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Filesystem failure while reading a problem or writing a report.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
