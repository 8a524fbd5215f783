//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: `Parse` and `Io` point
//! at malformed input, `InvalidParam` and `Domain` at values that violate a
//! documented precondition, and `Degenerate` / `NotSaddle` at parameter sets
//! whose phase geometry does not support the requested operation.

use crate::analysis::RegimeKind;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or option violates its documented range.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParam {
        name: String,
        value: f64,
        reason: &'static str,
    },

    /// An operand (state, bounds, allocation, ...) is outside the operation's domain.
    #[error("{0}")]
    Domain(String),

    /// Scenario text could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The stability denominator (or another analysis quantity) is too close
    /// to zero for the phase decomposition to be meaningful.
    #[error("degenerate analysis: {0}")]
    Degenerate(String),

    /// The operation is only defined in the saddle regime.
    #[error("operation requires the saddle regime, but the parameters are in the {0} regime")]
    NotSaddle(RegimeKind),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, value: f64, reason: &'static str) -> Self {
        Error::InvalidParam {
            name: name.into(),
            value,
            reason,
        }
    }
}

/// Free-function shorthand for [`Error::invalid`].
pub(crate) fn invalid(name: impl Into<String>, value: f64, reason: &'static str) -> Error {
    Error::invalid(name, value, reason)
}
