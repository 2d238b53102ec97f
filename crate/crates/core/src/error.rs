use thiserror::Error;

/// Errors raised by the engine.
///
/// `InvalidInput` covers everything a caller can fix by changing the data;
/// `Pole` and `Internal` indicate that an exactness check inside the engine
/// failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected} {what}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("gcd(r, D.w^2) = gcd({r}, {d_omega2}) != 1: (r, D) must satisfy the coprime condition")]
    NotCoprime { r: i64, d_omega2: i64 },
    #[error("coefficient keeps a (u^2-1)^{order} denominator at {at}")]
    Pole { order: u32, at: String },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
