use thiserror::Error;

/// Errors raised by the numerical kernels and configuration checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A model, basis, or solver configuration is inconsistent or unsupported.
    #[error("configuration error: {0}")]
    Config(String),

    /// The state of a trajectory stopped being finite.
    #[error("trajectory error at step {step}: non-finite state")]
    Trajectory { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
