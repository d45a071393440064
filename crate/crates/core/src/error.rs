use thiserror::Error;

use crate::model::Block;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid host parameters: {0}")]
    InvalidHost(String),

    #[error("invalid block: {0}")]
    InvalidBlock(String),

    #[error("invalid matching: block {first:?} and block {second:?} {reason}")]
    InvalidMatching { first: Box<Block>, second: Box<Block>, reason: &'static str },

    #[error("{what} is {size}, above the configured cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("vertex kind {kind} does not exist in {mode} hosts")]
    KindMismatch { kind: &'static str, mode: &'static str },

    #[error("half-length {m} outside the admissible range 2..={max}")]
    HalfLengthOutOfRange { m: u32, max: u32 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("colouring is partial: {uncoloured} host edges are uncoloured")]
    PartialColouring { uncoloured: usize },

    #[error("matching and colouring disagree on edge {u}-{v}")]
    Mismatch { u: u32, v: u32 },

    #[error(transparent)]
    Decode(#[from] DecodeError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Certificate parse failure, located by byte offset and line.
#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("byte {offset} (line {line}): {message}")]
    Syntax { offset: usize, line: usize, message: String },

    #[error("unexpected end of input at byte {offset}: {message}")]
    Truncated { offset: usize, message: String },

    #[error("byte {offset} (line {line}): {source}")]
    Invalid {
        offset: usize,
        line: usize,
        #[source]
        source: Box<Error>,
    },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match self {
            DecodeError::Syntax { offset, .. }
            | DecodeError::Truncated { offset, .. }
            | DecodeError::Invalid { offset, .. } => *offset,
        }
    }

    /// The underlying model error when the input parsed but described an invalid object.
    pub fn model_error(&self) -> Option<&Error> {
        match self {
            DecodeError::Invalid { source, .. } => Some(source),
            _ => None,
        }
    }
}
