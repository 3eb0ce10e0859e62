use thiserror::Error;

/// Errors produced while constructing, combining, or enumerating encoded
/// permutations and their circuits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside its documented range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must agree (sizes, sets, permutations, encoders)
    /// do not. The message names the differing field.
    #[error("incompatible operands: {0}")]
    Incompatible(String),

    /// An operation would exceed an enumeration or table-size budget.
    /// The message names the limit that was hit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn incompatible(msg: impl Into<String>) -> Error {
    Error::Incompatible(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}
