use thiserror::Error;

use crate::zerosets::Zero;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} = {value} outside supported range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The point is not half-isolated; carries the offending neighbours.
    #[error("precondition failed: {reason} ({} witness zeros)", witnesses.len())]
    NotHalfIsolated {
        reason: String,
        witnesses: Vec<Zero>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource limit: {what} needs {required} but the budget is {budget}")]
    Resource {
        what: &'static str,
        required: f64,
        budget: f64,
    },

    #[error("numerical error: {0}")]
    Numeric(String),

    #[error("construction failed at level {level}: {msg}")]
    Construction { level: usize, msg: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Range { .. } => "range",
            Error::Precondition(_) | Error::NotHalfIsolated { .. } => "precondition",
            Error::Parse { .. } => "parse",
            Error::Input(_) => "input",
            Error::Resource { .. } => "resource",
            Error::Numeric(_) => "numeric",
            Error::Construction { .. } => "construction",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for failures of a checked mathematical claim rather than bad input.
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Error::Construction { .. } | Error::Invariant(_) | Error::Numeric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn range_err(what: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::Range {
        what,
        value,
        range: range.into(),
    }
}
