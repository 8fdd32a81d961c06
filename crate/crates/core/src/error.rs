use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The CLI maps [`Error::Validation`] to exit code 2 and everything else to 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("operation not supported for this model: {0}")]
    Unsupported(String),

    #[error("{method} did not converge after {iterations} iterations ({detail})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        detail: String,
    },

    #[error("H table too short: H({x_max}) = {h_max} does not exceed 1/2")]
    TableTooShort { x_max: f64, h_max: f64 },

    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
