use thiserror::Error;

/// Errors raised across the verification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A dimension exceeded the configured cap or two operands disagree in shape.
    #[error("size error: {0}")]
    Size(String),

    /// A scalar parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violated a documented precondition (non-Hermitian, non-projector, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid stabilizer generators (non-commuting, dependent, wrong count).
    #[error("stabilizer spec error: {0}")]
    Spec(String),

    /// Text input could not be parsed. `position` is a 1-based line or character index.
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    /// The settings admit states other than the target in their joint pass space.
    #[error("incomplete verification set: {0}")]
    IncompleteVerificationSet(String),

    /// A forced measurement outcome has (numerically) zero probability.
    #[error("impossible branch: outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    ImpossibleBranch { qubit: usize, outcome: u8, probability: f64 },

    /// Should be unreachable for validated inputs.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse { position, message: message.into() }
    }
}
