use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("quadrature did not converge after {panels} panels (last estimate {estimate:e}, change {change:e})")]
    QuadratureNonConvergence {
        estimate: f64,
        change: f64,
        panels: usize,
    },

    #[error("target rate {rate} is not bracketed by the capacity model at h = {h} (reachable range [{lo}, {hi}])")]
    RateNotBracketed { rate: f64, h: f64, lo: f64, hi: f64 },

    #[error(
        "optimizer did not converge within {cycles} cycles (last incumbent: {})",
        trace.last().map(String::as_str).unwrap_or("none")
    )]
    NoConvergence { cycles: usize, trace: Vec<String> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. } | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
