use std::fmt;

use ssum_core::Error;

#[derive(Debug)]
pub enum CliError {
    Malformed(String),
    Budget(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CliError::Malformed(_) => "malformed",
            CliError::Budget(_) => "budget",
            CliError::Verification(_) => "verification",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Malformed(m) | CliError::Budget(m) | CliError::Verification(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label(), self.message())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            Error::Inconsistent(_) => CliError::Verification(e.to_string()),
            _ => CliError::Malformed(e.to_string()),
        }
    }
}
