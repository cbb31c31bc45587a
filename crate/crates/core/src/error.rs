use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight matrix is not positive semidefinite (quadratic form {0:e})")]
    NotPsd(f64),

    #[error("dimension {0} has zero anisotropy weight")]
    InactiveDimension(usize),

    #[error("matrix is singular: pivot {pivot:e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("GMRES breakdown at iteration {iteration} with relative residual {residual:e}")]
    Breakdown { iteration: usize, residual: f64 },

    #[error("matrix of order {n} is too large for a dense computation (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("degenerate map: Jacobian determinant {det:e} at ({x}, {y})")]
    DegenerateMap { det: f64, x: f64, y: f64 },

    #[error("degenerate element {0}")]
    DegenerateElement(usize),

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    #[error("Gram matrix not positive definite after jitter escalation (jitter {0:e})")]
    GramFactorization(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
