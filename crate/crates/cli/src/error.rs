use std::fmt;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(metareactor::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use metareactor::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Model(E::Domain(_)) => 2,
            CliError::Model(E::NonConvergence { .. } | E::Convergence { .. } | E::FitFailure(_)) => 3,
            CliError::Model(E::Infeasible(_) | E::UnreachableTarget(_)) => 4,
            CliError::Model(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<metareactor::Error> for CliError {
    fn from(e: metareactor::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
