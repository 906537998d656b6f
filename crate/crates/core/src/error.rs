use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("middle layers do not match: {0}")]
    LayerMismatch(String),

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("connection has no Perron-Frobenius weights")]
    MissingWeights,

    #[error("connection is not self-composable: all four sides must be the same graph")]
    NotSelfComposable,

    #[error("side mismatch: {0}")]
    SideMismatch(String),

    #[error("gauge: {0}")]
    Gauge(String),

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("invalid move sequence: {0}")]
    InvalidMoves(String),

    #[error("path basis of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("lattice points do not match: {0}")]
    PointMismatch(String),

    #[error("invalid fusion ring: {0}")]
    InvalidFusion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
