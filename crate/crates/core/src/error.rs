use thiserror::Error;

/// Errors raised by the algebra, integration, geometry and membership layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u32, found: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (entry ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize },

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("rank deficiency: expected rank {expected}, found {found}")]
    RankDeficiency { expected: usize, found: usize },

    #[error("no upper bracket below {limit} for the sum-of-squares gauge")]
    BisectionBracketFailure { limit: f64 },

    #[error("semidefinite feasibility undecided after {iterations} iterations")]
    Undecided { iterations: usize },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
