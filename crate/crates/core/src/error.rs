use thiserror::Error;

use crate::eigensolve::SpectrumResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point, energy or physical length outside the admissible set.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or malformed configuration (grid alignment, flags, profiles).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resolution error: m = {m} is below the minimum of {min} cells per pair extension")]
    Resolution { m: usize, min: usize },

    #[error("validation error: {0}")]
    Validation(String),

    /// The iterative eigensolver ran out of iterations. `best` holds the last Ritz pairs.
    #[error("eigensolver did not converge in {iterations} iterations (max residual {max_residual:.3e})")]
    NotConverged {
        iterations: usize,
        max_residual: f64,
        best: Box<SpectrumResult>,
    },

    #[error("system of {n} unknowns exceeds the dense limit of {cap}")]
    SizeLimit { n: usize, cap: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("interaction strength cap reached: ground state still below threshold at sigma = {sigma_max}")]
    SigmaCap { sigma_max: f64 },

    #[error("iteration error: {0}")]
    Iteration(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// Solver failure tagged with the (L, m) grid that produced it.
    #[error("solve at L = {length}, m = {m} failed: {source}")]
    AtGrid {
        length: f64,
        m: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. } | Error::Iteration(_) | Error::NotPositiveDefinite { .. } => 3,
            Error::SigmaCap { .. } => 3,
            Error::Io(_) | Error::Json(_) => 4,
            Error::AtGrid { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
