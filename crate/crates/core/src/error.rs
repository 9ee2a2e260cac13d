use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("exponent {0} outside the admissible range")]
    ExponentOutOfRange(f64),

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("complex entries are only accepted by Schatten spaces")]
    ComplexUnsupported,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("modular value is not finite")]
    NonFiniteModular,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exponent p_{index} equals 2; c^(2p/|p-2|) is undefined")]
    ExponentIsTwo { index: usize },

    #[error("invalid block support: {0}")]
    InvalidSupport(String),

    #[error("supports overlap at block {0}")]
    OverlappingSupport(usize),

    #[error("list lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("both vectors of the pair are zero")]
    ZeroPair,

    #[error("sample set is empty")]
    EmptySamples,

    #[error("invalid 2-projection candidate: {0}")]
    InvalidCandidate(String),

    #[error("iteration is not Cauchy at n={n}: |{current} - {previous}| exceeds {threshold}")]
    NonCauchy {
        n: usize,
        current: f64,
        previous: f64,
        threshold: f64,
    },

    #[error("rank decision is ambiguous: principal sine {value} lies just above tolerance {tol}")]
    AmbiguousRank { value: f64, tol: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
