use std::fmt;

/// Failure classes mapped onto process exit codes: config/validation
/// problems exit 2, verify-mode tolerance failures exit 3, everything
/// else (I/O mid-run, ...) exits 1.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Tolerance(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid config: {msg}"),
            CliError::Tolerance(msg) => write!(f, "verification failed: {msg}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub fn validation(msg: impl fmt::Display) -> CliError {
    CliError::Validation(msg.to_string())
}

pub fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}
