use thiserror::Error;

/// Errors produced by the kinetics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The adaptive step size collapsed below the representable resolution.
    #[error("integration failed at t = {time}: {reason} (last good f3 = {f3})")]
    IntegrationFailure { time: f64, f3: f64, reason: String },

    /// f3 left the physical basin and entered the runaway branch of the cubic.
    #[error("blow-up at t = {time}: f3 = {f3} left the basin |f3| <= {bound}")]
    BlowUp { time: f64, f3: f64, bound: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
