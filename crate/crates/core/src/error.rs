use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TessError {
    /// A scheme parameter violates one of its inequalities.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient servers: {required} required, {available} available")]
    InsufficientServers { required: usize, available: usize },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("index {index} out of bounds for dimension {bound}")]
    IndexOutOfBounds { index: usize, bound: usize },

    #[error("SVD did not converge after {sweeps} sweeps (matrix Frobenius norm {norm:e})")]
    SvdNoConvergence { norm: f64, sweeps: usize },

    #[error("truncation rank {rank} out of range 0..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    /// The budget leaves at least one tile with no servers and dropping was not allowed.
    #[error("{tiles} tiles but only {servers} servers; pass allow_dropped to zero out tiles")]
    TilesDropped { tiles: usize, servers: usize },

    #[error("invalid Marchenko-Pastur ratio {0} (must be positive and finite)")]
    InvalidRatio(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    /// Inputs are valid but the requested closed form does not cover them.
    #[error("outside closed-form regime: {0}")]
    OutsideRegime(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TessError {
    fn from(err: std::io::Error) -> Self {
        TessError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TessError>;
