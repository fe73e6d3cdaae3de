use thiserror::Error;

use crate::bits::BitString;
use crate::model::Symbol;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid transition graph: {0}")]
    InvalidGraph(String),

    #[error("invalid Markov source: {0}")]
    InvalidSource(String),

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("invalid length vector: {0}")]
    InvalidLengths(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("transition graph is not irreducible (not strongly connected)")]
    NotIrreducible,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("operation requires a finite-delay verdict")]
    WrongVerdict,

    #[error("symbol sequence is invalid at position {position}: {reason}")]
    InvalidSequence { position: usize, reason: String },

    #[error("bitstring is not the encoding of any valid symbol sequence")]
    NoParse,

    #[error("bitstring {bits} has at least two valid parses: {first:?} and {second:?}")]
    AmbiguousParse {
        bits: BitString,
        first: Vec<Symbol>,
        second: Vec<Symbol>,
    },

    #[error("malformed bitstring: {0}")]
    MalformedBits(String),
}
