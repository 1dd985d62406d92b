use thiserror::Error;

use crate::ordinal::Ordinal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("nesting depth {depth} exceeds limit {limit}")]
    DepthExceeded { depth: usize, limit: usize },
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("coefficient overflow")]
    Overflow,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("composite of consecutive maps is nonzero: {0}")]
    NotExact(String),
    #[error("family is not coherent at {tuple:?}: {detail}")]
    Incoherent { tuple: Vec<Ordinal>, detail: String },
    #[error("restrictions fail functoriality at {0} > {1} > {2}")]
    Functoriality(String, String, String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Input-shaped errors map to exit code 3, exhausted budgets to 2.
    pub fn is_fuel(&self) -> bool {
        matches!(self, Error::FuelExhausted(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
