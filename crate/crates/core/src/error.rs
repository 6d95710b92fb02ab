use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed instance or argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of the called operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("modulus {0} is not a prime below 2^63")]
    NotPrime(u64),

    #[error("operands live in different prime fields ({0} vs {1})")]
    FieldMismatch(u64, u64),

    #[error("work budget exceeded: needs {needed} cells, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    /// Post-hoc verification of a computed answer failed.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn inconsistent(msg: impl Into<String>) -> Self {
        Error::Inconsistent(msg.into())
    }
}

/// Checks a work estimate against a cell budget.
pub(crate) fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}
