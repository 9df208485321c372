use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemcapError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("precision exhausted after {bits} fractional bits")]
    PrecisionExhausted { bits: u32 },

    #[error("projection search exhausted after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("multisets {first} and {second} are identical")]
    NotDistinct { first: usize, second: usize },

    #[error("inconsistent labels between sequences {first} and {second}: {detail}")]
    Consistency { first: usize, second: usize, detail: String },

    #[error("gap violation: {0}")]
    GapViolation(String),

    #[error("precondition violation: {0}")]
    PreconditionViolation(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, MemcapError>;

impl From<std::io::Error> for MemcapError {
    fn from(e: std::io::Error) -> Self {
        MemcapError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for MemcapError {
    fn from(e: serde_json::Error) -> Self {
        MemcapError::Schema(e.to_string())
    }
}
