//! Crate-wide error type.
//!
//! Exit-code policy for the CLI: `0` success, `1` internal error,
//! `2` usage/validation error (bad shapes, bad config, missing files,
//! empty datasets).

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Incompatible shapes, with both shapes named.
    ShapeMismatch {
        op: &'static str,
        left: String,
        right: String,
    },
    /// An argument outside its documented domain.
    InvalidArg(String),
    /// A dataset that must be nonempty is empty.
    EmptyDataset(String),
    /// Training produced a non-finite loss.
    Diverged { epoch: usize, loss: f64 },
    /// Malformed config, model, or frame file.
    Parse(String),
    Io(std::io::Error),
}

impl Error {
    pub fn shape(op: &'static str, left: impl fmt::Display, right: impl fmt::Display) -> Self {
        Error::ShapeMismatch {
            op,
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, left, right } => {
                write!(f, "{op}: incompatible shapes {left} and {right}")
            }
            Error::InvalidArg(msg) => write!(f, "invalid argument: {msg}"),
            Error::EmptyDataset(what) => write!(f, "empty dataset: {what}"),
            Error::Diverged { epoch, loss } => {
                write!(f, "training diverged at epoch {epoch} (loss {loss})")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
