use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature tolerance not met: achieved error {achieved:e} against target {target:e}")]
    ToleranceNotMet { achieved: f64, target: f64 },

    #[error("root bracket could not be expanded past t = {last_upper:e}")]
    BracketExhausted { last_upper: f64 },

    #[error("trace is not sorted by time at event {index}")]
    UnsortedTrace { index: usize },

    #[error("query [{start}, {end}] lies outside the trace window [{window_start}, {window_end}]")]
    OutOfWindow {
        start: f64,
        end: f64,
        window_start: f64,
        window_end: f64,
    },

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
