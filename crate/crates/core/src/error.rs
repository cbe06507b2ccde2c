//! Error taxonomy shared by every module.

use thiserror::Error;

/// Failures reported by the library.
///
/// The variants separate caller mistakes ([`Error::InvalidInput`]), inputs
/// outside the range where a formula applies ([`Error::Hypothesis`]), and
/// internal inconsistencies that indicate a bug ([`Error::Internal`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed argument: non-prime modulus, zero δ, bad triple, index out of range.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The input is well formed but violates a hypothesis of the requested computation.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// The working p-adic precision is too small for the requested decision.
    #[error("insufficient precision: {0}")]
    Precision(String),
    /// A requested field or enumeration exceeds the supported size.
    #[error("too large: {0}")]
    TooLarge(String),
    /// Two computations that must agree did not.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn hypothesis(msg: impl Into<String>) -> Error {
    Error::Hypothesis(msg.into())
}

pub(crate) fn internal(msg: impl Into<String>) -> Error {
    Error::Internal(msg.into())
}
