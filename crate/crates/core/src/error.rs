use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Caller asked for an unsupported configuration (dimensions, bit
    /// widths, mismatched policy/dims, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a documented precondition (non-unitary matrix,
    /// unnormalized distribution, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A feedback payload could not be decoded (truncated, bad prefix,
    /// trailing bits).
    #[error("corrupt message: {0}")]
    CorruptMessage(String),

    /// Numerical failure inside an otherwise valid computation.
    #[error("numerical error: {0}")]
    Numerical(String),
}
