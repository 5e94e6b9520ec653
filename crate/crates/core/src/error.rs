use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("word not in vocabulary: {0}")]
    UnknownWord(String),
    #[error("token index {0} out of range")]
    InvalidIndex(usize),
    #[error("dependency distance 0: a context word cannot be the target itself")]
    ZeroDistance,
    #[error("no usable context word")]
    EmptyContext,
    #[error("target form {0:?} not found in sentence")]
    MissingSlot(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("noise distribution is not aligned with the space vocabulary")]
    Misaligned,
    #[error("undefined result: {0}")]
    Undefined(&'static str),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("every evaluation item was skipped")]
    AllSkipped,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
