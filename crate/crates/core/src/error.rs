use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum DecayError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("difference index {index:?} is outside the range of the geometry (max |m_j| = {radius})")]
    DiffOutOfRange { index: Vec<i64>, radius: i64 },

    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch { left: String, right: String },

    #[error("entry {position} is not finite")]
    NonFinite { position: usize },

    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("no convergence after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("multi-index order {order} exceeds the cap {cap}")]
    OrderCap { order: u32, cap: u32 },

    #[error("no probe of the grid satisfies |t| <= {h}")]
    EmptyGrid { h: f64 },

    #[error("{nodes} quadrature nodes per axis alias differences up to {max_diff}; need at least {required}")]
    Aliasing {
        nodes: usize,
        max_diff: i64,
        required: usize,
    },

    #[error("bandwidth {requested} exceeds the band range {range} of the geometry")]
    BandRange { requested: usize, range: usize },

    #[error("insufficient data for a fit: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DecayError {
    /// True for failures of a numerical computation (as opposed to bad input or I/O).
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            DecayError::Singular { .. } | DecayError::Convergence { .. }
        )
    }
}

pub type Result<T, E = DecayError> = std::result::Result<T, E>;
