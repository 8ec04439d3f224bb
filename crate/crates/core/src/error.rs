use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A NaN or infinity appeared in the state after integration step `step`.
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("ensemble member {member} failed: {source}")]
    Member {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the arithmetic rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure(_) | Error::NonFiniteState { .. } => true,
            Error::Member { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
