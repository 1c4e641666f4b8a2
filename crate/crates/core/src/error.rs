use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or configuration.
    #[error("config error: {0}")]
    Config(String),
    /// A geometric constraint of the scenario is violated.
    #[error("constraint error: {0}")]
    Constraint(String),
    /// The point cloud does not span the ambient dimension.
    #[error("dimensional degeneracy: {0}")]
    Degenerate(String),
    /// Envelope data is not convex or otherwise inconsistent.
    #[error("integrity error: {0}")]
    Integrity(String),
    /// Query outside the sampled range of a function.
    #[error("range error: {0}")]
    Range(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("hull computation failed: {0}")]
    Hull(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the caller's input rather than by a computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Constraint(_) | Error::Parse { .. } | Error::Range(_)
        )
    }
}
