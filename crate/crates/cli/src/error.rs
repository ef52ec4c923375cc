use cubic_mf::oracle::OracleError;
use cubic_mf::solver::SolveError;
use cubic_mf::transitions::TransitionError;
use thiserror::Error;

/// Failure of a command, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    NoTransition(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::NoTransition(_) => 4,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Domain(_) | SolveError::Config(_) | SolveError::StartOutsideDomain => {
                CliError::Input(e.to_string())
            }
            SolveError::NoRootBracketed | SolveError::NoConvergence(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<TransitionError> for CliError {
    fn from(e: TransitionError) -> Self {
        match e {
            TransitionError::Solve(inner) => inner.into(),
            TransitionError::NoBranchChange { .. } | TransitionError::BranchLost { .. } => {
                CliError::Solver(e.to_string())
            }
            TransitionError::NoTransition(_) => CliError::NoTransition(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Solve(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}
