use thiserror::Error;

use crate::field::GridFunction;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural hypothesis (for example `p(1-s) > 1` on the singular branch) fails.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("solver did not converge after {sweeps} sweeps (last change {last_change:.3e}, residual {residual:.3e})")]
    NonConvergence {
        sweeps: usize,
        last_change: f64,
        residual: f64,
        last_iterate: Box<GridFunction>,
    },

    #[error("constant search exhausted: {0}")]
    SearchExhausted(String),

    #[error("fit undefined: {0}")]
    UndefinedFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
