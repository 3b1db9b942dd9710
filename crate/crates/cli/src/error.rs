use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INVALID_CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const SINGULAR: i32 = 4;
    pub const EMPTY: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot write output: {0}")]
    Output(String),

    #[error(transparent)]
    Model(#[from] foldwave_core::Error),

    #[error("empty result: {0}")]
    Empty(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use foldwave_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Output(_) => exit::INVALID_CONFIG,
            CliError::Empty(_) => exit::EMPTY,
            CliError::Verify(_) => exit::VERIFY_FAILED,
            CliError::Model(e) => match e {
                E::SingularKappa { .. } => exit::SINGULAR,
                E::SlowDomain(_)
                | E::UnsupportedHarmonic(_)
                | E::InvalidParameter { .. }
                | E::UnsupportedParameter(_)
                | E::InvalidInput(_) => exit::INVALID_CONFIG,
                E::EmptyTrajectory => exit::EMPTY,
                E::StepUnderflow { .. }
                | E::StepLimit(_)
                | E::NonFinite(_)
                | E::NotAnEquilibrium { .. }
                | E::NoConvergence(_) => exit::NUMERICAL,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
