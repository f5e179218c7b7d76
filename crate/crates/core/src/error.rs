use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketed root search did not converge. Carries the last bracket.
    #[error("solver did not converge in {iterations} iterations; last bracket [{lo}, {hi}]")]
    Solver { lo: f64, hi: f64, iterations: usize },

    /// An objective returned a non-finite value.
    #[error("objective is not finite at score {score}: {value}")]
    Evaluation { score: f64, value: f64 },

    /// Two routes that must agree did not. Indicates a bug, never bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
