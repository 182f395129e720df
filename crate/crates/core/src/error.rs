//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Cipher key construction with a length outside 16..=32 octets.
    #[error("invalid cipher key length: {0} octets (expected 16..=32)")]
    InvalidKeyLength(usize),

    #[error("invalid IV length: {0} octets (expected 16)")]
    InvalidIvLength(usize),

    #[error("invalid scalar length: {0} octets (expected 32)")]
    InvalidScalarLength(usize),

    #[error("invalid point length: {0} octets (expected 32)")]
    InvalidPointLength(usize),

    #[error("invalid salt length: {0} octets (expected 32)")]
    InvalidSaltLength(usize),

    /// Scalar multiplication produced the all-zero point (low-order input).
    /// The session must be aborted rather than continue with a weak key.
    #[error("degenerate shared secret: scalar multiplication yielded the all-zero point")]
    DegenerateSharedSecret,

    #[error("entropy source failure: {0}")]
    EntropyFailure(String),

    #[error("session lifecycle violation: {0}")]
    Lifecycle(&'static str),

    #[error("not a seer-destroyed file: {0}")]
    NotASeerFile(&'static str),

    #[error("corrupt footer: {0}")]
    CorruptFooter(&'static str),

    #[error("unsupported footer version: {0}")]
    UnsupportedVersion(u16),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
