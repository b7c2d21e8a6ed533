use alloc::string::String;

/// Errors raised by the motion, script, tokenizer and metric operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("motion too short: {frames} frames, need at least {required}")]
    MotionTooShort { frames: usize, required: usize },
    #[error("bad dimensionality: expected {expected}, got {actual}")]
    BadDimensionality { expected: usize, actual: usize },
    #[error("frame count mismatch: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },
    #[error("invalid motion: {0}")]
    InvalidMotion(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("snippet budget exceeded: {snippets} snippets exceeds the limit of {limit}")]
    SnippetBudgetExceeded { snippets: usize, limit: usize },
    #[error("body part {0} absent from snippet {1}")]
    BodyPartAbsent(String, usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("token {token} out of range 1..={max}")]
    TokenOutOfRange { token: u64, max: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed motion delimiters: {0}")]
    MalformedDelimiters(String),
    #[error("unexpected content inside motion block: {0:?}")]
    GarbageInsideBlock(String),
    #[error("empty snippet at position {0}")]
    EmptySnippet(usize),
    #[error("cannot infer body part from sentence {0:?}")]
    UnknownBodyPart(String),
    #[error("invalid sentence {0:?}")]
    InvalidSentence(String),
    #[error("invalid script: {0}")]
    InvalidScript(String),
    #[error("no valid edit for this script under the given weights")]
    NoValidEdit,
    #[error("source mismatch: {0} vs {1}")]
    SourceMismatch(String, String),
    #[error("triplet {0} has not passed quality control")]
    UnvalidatedInput(String),
    #[error("snippet must have {expected} frames, got {actual}")]
    WrongSnippetLength { expected: usize, actual: usize },
    #[error("count mismatch: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },
    #[error("empty candidate")]
    EmptyCandidate,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rewriter unavailable: {0}")]
    RewriterUnavailable(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
