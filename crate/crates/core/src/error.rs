//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter violates its domain (non-positive length, zero
    /// temperature coefficient, ...). Carries the offending field name.
    #[error("parameter `{field}` out of domain: {message}")]
    Parameter { field: &'static str, message: String },

    /// A required optional field (diameter, emissivity, eta) is absent.
    #[error("missing configuration: {0}")]
    MissingField(&'static str),

    /// Evaluation requested outside the model's spatial domain.
    #[error("position x = {x} m outside specimen span [0, {length} m]")]
    OutOfDomain { x: f64, length: f64 },

    /// The demodulation window does not span an integer number of periods.
    #[error("demodulation window spans {periods} drive periods; need a positive integer count")]
    Windowing { periods: f64 },

    /// Too few samples per period to resolve the requested harmonic.
    #[error("harmonic {harmonic} unresolvable at {samples_per_period} samples/period")]
    Aliasing {
        harmonic: u32,
        samples_per_period: usize,
    },

    /// The time-domain solver did not reach a periodic steady state.
    #[error("no periodic steady state after {periods} periods (defect {defect:.3e} > {tolerance:.3e})")]
    Convergence {
        periods: usize,
        defect: f64,
        tolerance: f64,
    },

    /// The least-squares problem is degenerate (unidentifiable parameter,
    /// singular normal equations, or a bound that cannot be honored).
    #[error("fit degenerate: {0}")]
    FitDegeneracy(String),

    /// Malformed input data (CSV rows, config values).
    #[error("input error: {0}")]
    Input(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parameter(field: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            field,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 1 input, 2 convergence/fit, 0 otherwise
    /// (condition-threshold failures are mapped separately by `check`).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } | Error::FitDegeneracy(_) => 2,
            _ => 1,
        }
    }
}
