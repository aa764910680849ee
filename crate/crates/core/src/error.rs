use thiserror::Error;

use crate::lattice::SparseFunction;

/// Errors produced by the lattice, rearrangement, functional and oracle APIs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("function values must be finite and strictly positive, got {0}")]
    NonPositiveValue(f64),

    #[error("duplicate lattice point {0}")]
    DuplicatePoint(String),

    #[error("empty support")]
    EmptySupport,

    #[error("invalid exponent {0}: must be at least 1")]
    InvalidExponent(f64),

    #[error("no fixed point after {cycles} full cycles")]
    MaxCyclesExceeded {
        cycles: usize,
        last: Box<SparseFunction>,
    },

    #[error("cycle is not a permutation of the direction set for dimension {0}")]
    NotAPermutation(usize),

    #[error("divergent configuration: {0}")]
    Divergent(String),

    #[error("scalar function must vanish at 0, got f(0) = {0}")]
    NonZeroAtOrigin(f64),

    #[error("window of radius {window} does not cover the support")]
    WindowTooSmall { window: i64 },

    #[error("{what} exceeds the budget of {limit}")]
    BudgetExceeded { what: &'static str, limit: usize },

    #[error("size mismatch: {values} values for {cells} cells")]
    SizeMismatch { values: usize, cells: usize },

    #[error("search exhausted without a witness: {0}")]
    SearchExhausted(&'static str),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid bivariate function: {0}")]
    InvalidBivariate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
