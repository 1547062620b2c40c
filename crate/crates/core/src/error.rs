use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("spectrum is not conjugate-symmetric (max defect {defect:e} relative to {scale:e})")]
    Asymmetric { defect: f64, scale: f64 },

    #[error("fractional order out of range: {0}")]
    InvalidOrder(String),

    #[error("orthogonality condition (f, 1) = 0 violated: |f^(0)| = {zero_mode:e} exceeds {threshold:e}")]
    Orthogonality { zero_mode: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nonlinearity violates g(0) = 0, grad g(0) = 0: {0}")]
    NonlinearityAssumption(String),

    #[error("kernel constants vanish: {0}")]
    DegenerateKernels(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("fixed-point iteration diverged: measured ratio {ratio:.6e} vs bound eps*sigma = {eps_sigma:.6e}")]
    Diverged { ratio: f64, eps_sigma: f64 },

    #[error("fixed-point iteration did not converge in {iterations} iterations (last step {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64 },

    #[error("contraction bound void: eps*sigma = {0} >= 1")]
    BoundVoid(f64),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
