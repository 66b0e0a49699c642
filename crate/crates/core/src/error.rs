use std::io;

use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The variants map one-to-one onto the CLI exit codes: input and
/// precondition problems are the caller's fault, capability errors mean the
/// data at hand cannot answer the question, and invariant/overflow errors
/// indicate a bug or an exhausted counter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capability missing: {0}")]
    Capability(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("counter overflow: {0}")]
    Overflow(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err($crate::error::Error::$variant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
