use std::fmt;

use growthrisk_core::Error as CoreError;

/// A failed run, carrying its exit code class.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, config file, or parameters outside their domain. Exit 1.
    Config(String),
    /// A solver or estimator failed on valid input. Exit 2.
    Numeric(String),
    /// `verify` ran and some check failed. Exit 3.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain { .. }
            | CoreError::InvalidMarket(_)
            | CoreError::InvalidMeasure(_)
            | CoreError::UnsupportedStructure(_) => CliError::Config(e.to_string()),
            CoreError::Bracket { .. } | CoreError::NonMonotone { .. } | CoreError::EmptySample => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}
