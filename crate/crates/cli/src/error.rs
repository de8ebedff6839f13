use std::fmt;

use opnorm_core::Error;

/// Exit status 2 for usage and config problems, 1 for runtime failures.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Single-line form written to stderr: `error[usage] ...` or `error[runtime] ...`.
    pub fn line(&self) -> String {
        let (tag, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Runtime(m) => ("runtime", m),
        };
        format!("error[{tag}] {}", msg.replace(['\n', '\r'], " "))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter { .. }
            | Error::Scale { .. }
            | Error::Shape { .. }
            | Error::Kind(_)
            | Error::NotUnit { .. }
            | Error::NotSubGaussian(_)
            | Error::DegenerateEnsemble(_)
            | Error::Parse { .. }
            | Error::UnknownKey(_) => CliError::Usage(e.to_string()),
            Error::Data(_)
            | Error::Convergence { .. }
            | Error::JacobiConvergence { .. }
            | Error::InsufficientTail { .. }
            | Error::Io { .. } => CliError::Runtime(e.to_string()),
        }
    }
}
