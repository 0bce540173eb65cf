use d2dlb_core::CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration or its inputs are unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// An LP could not be solved to optimality.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A computed result broke an invariant or a bound.
    #[error("check failed: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Config(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Solver { .. } | CoreError::Lp(_) => CliError::Solver(e.to_string()),
            CoreError::UnreachableDemand { .. } => CliError::Violation(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
