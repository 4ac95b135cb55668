use thiserror::Error;

/// Errors produced by the transport library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("height vector has an empty cell at site {site}")]
    NotAdmissible { site: usize },

    #[error("point lies outside the domain")]
    OutOfDomain,

    #[error("gradient undefined: point lies on the boundary between cells {first} and {second}")]
    UndefinedGradient { first: usize, second: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("solver did not converge after {iterations} iterations (gradient {gradient_inf_norm:e})")]
    NotConverged {
        iterations: usize,
        gradient_inf_norm: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
