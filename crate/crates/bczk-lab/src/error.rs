//! Crate-wide error type.

/// Errors produced anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter set violates one of its validation rules.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A derived parameter does not fit in the integer width in use.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// Inputs with inconsistent lengths or shapes.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// A party received a message it cannot process.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A protocol aborted at a specific position (slot, bit, or cell).
    #[error("{what} aborted at index {index}")]
    AbortAt { what: String, index: usize },

    /// The session engine could not make progress within its step budget.
    #[error("engine stalled: {0}")]
    Stall(String),

    /// A numeric routine was called outside its domain.
    #[error("numeric domain error: {0}")]
    Domain(String),

    /// A brute-force search was requested at an infeasible size.
    #[error("search space too large: {0}")]
    TooLarge(String),

    /// Experiment configuration rejected.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
