use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("truncation too small: leaked mass {leak:.3e} exceeds tolerance, use dim >= {required_dim}")]
    TruncationTooSmall { required_dim: usize, leak: f64 },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("function not finite at eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName { kind: &'static str, name: String, known: String },

    #[error("superoperator dimension {dim}^2 exceeds the limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("time window violated: dt = {dt} exceeds max admissible {max_dt}")]
    Window { dt: f64, max_dt: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
