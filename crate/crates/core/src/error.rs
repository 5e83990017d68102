use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("score {score} out of range 1..=6{}", context_suffix(.context))]
    ScoreOutOfRange { score: i64, context: String },

    #[error("duplicate essay id `{0}`")]
    DuplicateId(String),

    #[error("row ids differ: {0}")]
    RowMismatch(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("feature schema mismatch: {0}")]
    Schema(String),

    /// QWK denominator is zero: both sequences sit on the same single label.
    #[error("degenerate score distribution: expected weighted disagreement is zero")]
    DegenerateQwk,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty subset: {0}")]
    EmptySubset(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        alloc::format!(" ({context})")
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::DegenerateQwk | Error::NonFinite(_))
    }
}
