use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state is not normalized (|norm - 1| = {deviation:e})")]
    Normalization { deviation: f64 },
    #[error("algebra error: {0}")]
    Algebra(String),
    #[error("Lanczos did not converge: {0}")]
    Convergence(String),
    #[error("invalid bipartition: {0}")]
    Partition(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("sweep cell (ix={ix}, iy={iy}) failed: {source}")]
    Cell {
        ix: usize,
        iy: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
