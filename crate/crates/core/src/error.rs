use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid media model: {0}")]
    Model(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("eigenvalue iteration did not converge after {iterations} sweeps ({found} of {n} eigenvalues found)")]
    NoConvergence {
        iterations: usize,
        found: usize,
        n: usize,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
