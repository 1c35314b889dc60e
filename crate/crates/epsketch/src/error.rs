use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("point {index} has norm {norm} outside the unit ball")]
    OutsideUnitBall { index: usize, norm: f64 },

    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },

    #[error("bit stream truncated")]
    TruncatedStream,

    #[error("magnitude overflow in encoded point")]
    MagnitudeOverflow,

    #[error("malformed sketch file: {0}")]
    MalformedFile(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("diagonal query not supported (i = j = {0})")]
    DiagonalQuery(usize),

    #[error("slab feasibility did not converge: residual {residual:.3e} after {sweeps} sweeps")]
    NonConvergence { residual: f64, sweeps: usize },

    #[error("bipartite reduction failed after {retries} retries (best achieved eps {best:.6})")]
    ExhaustedRetries { retries: usize, best: f64 },

    #[error("net construction exhausted patience with {achieved} of {target} points")]
    PatienceExhausted { achieved: usize, target: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
