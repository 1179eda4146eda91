use thiserror::Error;

/// Failures of a subcommand, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Audit(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<onlinefwer::Error> for CliError {
    fn from(e: onlinefwer::Error) -> Self {
        use onlinefwer::Error as E;
        match e {
            E::InvalidInput { .. } | E::Index(_) => CliError::Input(e.to_string()),
            E::InvariantViolation { .. } | E::IncompleteTrace(_) => CliError::Audit(e.to_string()),
            E::InvalidParameter(_) | E::Mismatch(_) | E::Infeasible(_) | E::Divergent(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
