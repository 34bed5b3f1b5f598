use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error(
        "attempt budget exhausted after {attempts} attempts ({accepted} accepted, \
         observed acceptance rate {rate:.3e})"
    )]
    BudgetExhausted {
        attempts: u64,
        accepted: u64,
        rate: f64,
    },

    #[error("inconsistent family: {0}")]
    InconsistentFamily(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
