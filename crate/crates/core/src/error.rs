//! Error taxonomy shared by the whole crate.
//!
//! Three classes, mirrored by the CLI exit codes: bad input (`Argument`, exit
//! 1), an enumeration that would exceed its budget (`Capacity`, exit 2), and an
//! internal cross-check that failed (`Integrity`, exit 3). Integrity errors are
//! the serious ones — they mean two independently computed quantities that must
//! agree did not.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("argument error: {0}")]
    Argument(String),

    /// An operation would enumerate more than its budget allows.
    #[error("capacity error: {what} needs {required} bits, budget is {budget} bits")]
    Capacity {
        what: String,
        required: u32,
        budget: u32,
    },

    /// An internal invariant failed; two exact computations disagree.
    #[error("integrity error: {0}")]
    Integrity(String),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn capacity(what: impl Into<String>, required: u32, budget: u32) -> Self {
        Error::Capacity {
            what: what.into(),
            required,
            budget,
        }
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 1,
            Error::Capacity { .. } => 2,
            Error::Integrity(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
