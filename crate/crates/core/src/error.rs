use thiserror::Error;

use crate::numerics::NumericError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("input outside the family domain: {0}")]
    DomainMismatch(String),
    #[error("unsupported constraint pattern: {0}")]
    UnsupportedConstraintPattern(String),
    #[error("no family member is consistent with the feedback so far")]
    ExhaustedFamily,
    #[error("voting learner has no active copies left")]
    NoActiveCopies,
    #[error("lie schedule has {scheduled} rounds but the budget is {eta}")]
    BudgetExceeded { scheduled: usize, eta: usize },
    #[error("adversary inconsistent: {0}")]
    AdversaryInconsistent(String),
    #[error("feedback contradicts the learner's hypothesis class: {0}")]
    InconsistentFeedback(String),
    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::Numeric(NumericError::CapExceeded { .. }))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
