use thiserror::Error;

/// Errors raised by the estimators and their supporting numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// All standardized residuals sit in the flat region of psi_0, so the
    /// tau weight has a vanishing denominator.
    #[error("degenerate tau weight: denominator {denominator:e} is not positive")]
    DegenerateWeight { denominator: f64 },

    #[error("degenerate scale{}", match .column { Some(c) => format!(" in column {c}"), None => String::new() })]
    DegenerateScale { column: Option<usize> },

    #[error("degenerate pilot: {0}")]
    DegeneratePilot(String),

    #[error("solver diverged: {0}")]
    SolverDivergence(String),

    #[error("singular expectation matrix (condition number {condition:e})")]
    SingularExpectation { condition: f64 },

    #[error("inconsistent support: {0}")]
    InconsistentSupport(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn invalid_input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
