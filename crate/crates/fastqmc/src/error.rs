use thiserror::Error;

/// Errors shared across the library modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("residue is zero modulo {modulus}; operand must be a unit")]
    ZeroResidue { modulus: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("input must be non-empty")]
    EmptyInput,

    #[error("argument {arg} out of domain: {reason}")]
    OutOfDomain { arg: f64, reason: &'static str },

    #[error("matrix is not symmetric positive definite (pivot {pivot} failed)")]
    NotPositiveDefinite { pivot: usize },

    #[error("zero pivot at row {index} during tridiagonal elimination")]
    ZeroPivot { index: usize },

    #[error("transform {transform} is unbounded at the zero point; choose a drop or substitute policy for row 0")]
    UnboundedAtZero { transform: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
