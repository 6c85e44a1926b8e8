use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("digit '{ch}' at position {pos} is not valid in base {q}")]
    MalformedDigit { ch: char, pos: usize, q: usize },

    #[error("syntax error in {what} '{text}': {reason}")]
    Syntax {
        what: &'static str,
        text: String,
        reason: String,
    },

    #[error("invalid partition parameters: {0}")]
    InvalidParams(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("base mismatch: expected q={expected}, found q={found}")]
    BaseMismatch { expected: usize, found: usize },

    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {what} (largest feasible: {achievable})")]
    ResourceLimit { what: String, achievable: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by malformed user-supplied text.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::MalformedDigit { .. }
                | Error::Syntax { .. }
                | Error::InvalidParams(_)
                | Error::InvalidPermutation(_)
        )
    }

    pub(crate) fn syntax(what: &'static str, text: &str, reason: impl Into<String>) -> Self {
        Error::Syntax {
            what,
            text: text.to_owned(),
            reason: reason.into(),
        }
    }
}
