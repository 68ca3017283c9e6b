//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]; the CLI maps the variants onto
//! its exit-code taxonomy (config / parse / validation / resource).

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its documented domain (bad ratio,
    /// zero dimensions, infeasible generator parameters, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A line of an input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input that violates a data invariant (self-loop,
    /// attribute id outside the declared universe, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A hash function was applied to an element outside its domain.
    #[error("element {element} is outside the hash domain [0, {modulus})")]
    HashDomain { element: u32, modulus: u64 },

    /// MinHash of an empty set; callers substitute the sentinel instead.
    #[error("cannot take the MinHash of an empty set")]
    EmptySet,

    /// Two signatures or embedding rows of different lengths were compared.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An edge split could not be produced (too few edges, no non-edges to
    /// sample negatives from, ...).
    #[error("edge split failed: {0}")]
    Split(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
