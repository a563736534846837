use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("qubit count {found} is outside the supported range {min}..={max}")]
    QubitRange { found: u32, min: u32, max: u32 },

    #[error("{what} needs {found} qubits but this build is capped at {max}")]
    Capacity {
        what: &'static str,
        found: u32,
        max: u32,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite Taylor coefficient at term {term} (use more segments)")]
    NumericOverflow { term: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, AnnealError>;
