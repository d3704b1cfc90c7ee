use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {context}: {detail}")]
    Domain { context: &'static str, detail: String },

    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("overflow in {context} (argument {argument})")]
    Overflow { context: &'static str, argument: f64 },

    #[error("series for {context} did not converge within {terms} terms (last term {last_term:e})")]
    NonConvergence {
        context: &'static str,
        terms: usize,
        last_term: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("kernel is singular at t = {t} (term n = {term})")]
    Singular { t: f64, term: usize },

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("basis matrix is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("step {step} is not compatible with delay {delay}")]
    StepIncompatible { step: f64, delay: f64 },

    #[error("solution diverged at t = {t} (|A| = {magnitude:e})")]
    Divergence { t: f64, magnitude: f64 },

    #[error("parameters violate the invariance constraint: {0}")]
    ConstraintViolation(String),

    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            context,
            detail: detail.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Pole(_)
                | Error::DimensionMismatch { .. }
                | Error::StepIncompatible { .. }
                | Error::ConstraintViolation(_)
                | Error::Config { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
