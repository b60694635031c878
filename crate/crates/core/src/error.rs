use thiserror::Error;

use crate::linprog::LpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid system configuration; `field` names the offending input.
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("no feasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("unbounded linear program (malformed schedule model)")]
    Unbounded,

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("dimension mismatch: {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("result carries no transmission schedule")]
    MissingSchedule,
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
