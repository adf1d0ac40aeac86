use thiserror::Error;

use crate::experiments::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("non-finite value in {what} at t = {time}")]
    NonFinite { what: &'static str, time: f64 },

    #[error("non-finite intermediate in backstepping stage {stage}")]
    BackstepStage { stage: usize },

    #[error("controller fault: input gain beta(x) vanished")]
    ZeroInputGain,

    #[error("derivative tap {requested} exceeds filter order {order}")]
    TapOrder { requested: usize, order: usize },

    #[error("high-order tuner derivative k = {k} exceeds n - 2 = {max}")]
    DerivativeOrder { k: usize, max: usize },

    #[error("sample timestamp {time} precedes last sample at {last}")]
    OutOfOrder { time: f64, last: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("state magnitude {magnitude:e} exceeds {limit:e} at t = {time}")]
    BlowUp { magnitude: f64, limit: f64, time: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed trace csv: {0}")]
    TraceFormat(String),

    #[error("empty trace")]
    EmptyTrace,

    #[error("simulation diverged at t = {last_valid_time}: {reason}")]
    Diverged {
        last_valid_time: f64,
        reason: String,
        partial: Box<Trace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
