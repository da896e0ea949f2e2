use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A generator, schedule or search parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what} {value} outside of [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },

    /// An exact rational outgrew the configured size cap. Callers should
    /// fall back to float mode.
    #[error("exact rational needs {bits} bits, budget is {budget}; retry in float mode")]
    BitBudget { bits: u64, budget: u64 },

    #[error("construction failed: {0}")]
    Construction(String),

    /// An enclosure straddles the decision threshold.
    #[error("comparison undecided: {0}")]
    Undecided(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
