use std::path::PathBuf;

/// Errors raised by the laboratory's numerical and I/O routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    #[error("dimension {dim} exceeds the exact-oracle limit {limit}")]
    Scale { dim: usize, limit: usize },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("norm kind {0} has no closed form")]
    Kind(&'static str),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {estimate}, change {residual})")]
    Convergence {
        estimate: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("Jacobi sweeps did not converge after {sweeps} sweeps")]
    JacobiConvergence { sweeps: usize },

    #[error("{0} is not sub-Gaussian")]
    NotSubGaussian(String),

    #[error("insufficient tail: only {points} grid points with nonzero survival (need 3)")]
    InsufficientTail { points: usize },

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
