use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("duplicate value at positions {first} and {second}")]
    DuplicateValue { first: usize, second: usize },

    #[error("word length {word} is shorter than required length {required}")]
    WordTooShort { word: usize, required: usize },

    #[error("{what} has size {size}, above the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("operation requires the binary alphabet {{0, 1}}, got {size} letters")]
    NotBinary { size: usize },

    #[error("letter {letter} is outside an alphabet of {size} letters")]
    LetterOutOfRange { letter: usize, size: usize },

    #[error("unknown letter token {token:?}")]
    UnknownToken { token: String },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid eraser sequence: {0}")]
    InvalidEraser(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid directing measure: {0}")]
    InvalidRho(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invariant {invariant} violated at step {step}")]
    InvariantViolation { invariant: &'static str, step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
