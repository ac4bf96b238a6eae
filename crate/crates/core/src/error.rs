//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A dimension or size argument outside the supported range.
    #[error("size error: {what} = {value} outside {range}")]
    Size {
        what: &'static str,
        value: usize,
        range: &'static str,
    },

    /// An index outside its valid range.
    #[error("index error: {what} = {index} outside 1..={max}")]
    Index {
        what: &'static str,
        index: usize,
        max: usize,
    },

    /// A Gamma-type function was asked for its value at a pole.
    #[error("pole of {function} at argument {argument}")]
    Pole {
        function: &'static str,
        argument: f64,
    },

    /// Parameter violates a precondition.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Formula is singular for this parameter combination.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// Series, quadrature or iteration did not converge.
    #[error("{what} did not converge after {iterations} iterations (last correction {last:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    /// A least-squares fit or linear solve is too ill-conditioned to trust.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// An extrapolated limit did not settle; the observed sequence is attached.
    #[error("precision error: {message}; sequence {sequence:?}")]
    Precision { message: String, sequence: Vec<f64> },

    /// The ODE integrator failed.
    #[error("integration error: {0}")]
    Integration(String),

    /// The inward integration picked up the growing solution.
    #[error("growth-mode contamination: relative drift {drift:e} between T_max and 1.5 T_max")]
    Contamination { drift: f64 },

    /// Line search could not find a decrease.
    #[error("optimization error: {message} (J trace {trace:?})")]
    Optimization { message: String, trace: Vec<f64> },

    /// Mismatched shapes or non-finite data.
    #[error("shape error: {0}")]
    Shape(String),

    /// Failure attached to a single spectral mode `(k, s)`.
    #[error("mode (k = {k}, s = {sign}): {source}")]
    Mode {
        k: usize,
        sign: char,
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
