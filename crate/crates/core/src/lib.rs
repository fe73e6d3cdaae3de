//! Variable-length codes for Markov sources with forbidden transitions.
//!
//! When a source can never emit certain symbol pairs, a code only has to
//! keep *possible* sequences apart. Such codes may violate the Kraft
//! inequality and still be uniquely decodable. This crate provides:
//!
//! * [`model`]: exact rational Markov sources, entropies and expected lengths;
//! * [`spectral`]: the substitution matrix and the `ρ(Q) ≤ 1` check;
//! * [`sptest`]: the labelled suffix-set decodability test;
//! * [`codec`]: encoding, batch and streaming decoding, and a per-state
//!   Huffman baseline;
//! * [`search`]: a brute-force collision oracle and exhaustive codebook search.

pub mod bits;
pub mod codec;
pub mod error;
pub mod linalg;
pub mod model;
pub mod search;
pub mod spectral;
pub mod specfile;
pub mod sptest;

pub use bits::BitString;
pub use error::{Error, Result};
pub use linalg::Rational;
pub use model::{Distribution, LengthVector, MarkovSource, Symbol, TransitionGraph};
pub use search::CollisionWitness;
pub use spectral::{KraftClass, KraftVerdict, QMatrix};
pub use sptest::{Codebook, LabeledSuffix, SpReport, SpVerdict};
