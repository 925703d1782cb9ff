use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("lookup index {index} out of range for table of {vocab} rows")]
    Lookup { index: usize, vocab: usize },
    #[error("empty sequence: {0}")]
    EmptySequence(&'static str),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("ordering of length {len} exceeds the exact-enumeration limit of {max}")]
    OrderingTooLong { len: usize, max: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("duplicate candidate item {0}")]
    DuplicateCandidate(usize),
}
