use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input at coordinate {index}")]
    NonFinite { index: usize },
    #[error("zero vector has no norming direction")]
    ZeroVector,
    #[error("non-smooth point (smoothness margin {margin})")]
    NonSmoothPoint { margin: f64 },
    #[error("invalid norm spec `{text}`: {reason}")]
    ParseNormSpec { text: String, reason: String },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("norm is not 1-symmetric: {0}")]
    NotOneSymmetric(String),
    #[error("quadrature did not converge within {evals} evaluations (error estimate {err:e})")]
    QuadratureBudget { evals: usize, err: f64 },
    #[error("integrand returned a non-finite value at point {point:?}")]
    NonFiniteIntegrand { point: Vec<f64> },
    #[error("matrix error: {0}")]
    Matrix(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
