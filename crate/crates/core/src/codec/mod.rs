//! Encoding by codeword concatenation and constraint-aware decoding.
//!
//! Decoding is a dynamic program over `(bit position, last symbol)` cells.
//! A cell holds how many valid parses of the prefix end there (saturating
//! at two) and back-pointers to its predecessors, so the same pass finds
//! the parse, reports inputs with no parse, and detects ambiguity.

mod huffman;
mod stream;

pub use huffman::{build_conditional_huffman, huffman_code, huffman_expected_length, ConditionalHuffman, SubCode};
pub use stream::{stream_decode, Emission, StreamDecoder};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::model::{Symbol, TransitionGraph};
use crate::sptest::Codebook;

/// Concatenates codewords of a nonempty, graph-valid sequence.
pub fn encode(graph: &TransitionGraph, code: &Codebook, seq: &[Symbol]) -> Result<BitString> {
    if code.len() != graph.len() {
        return Err(Error::DimensionMismatch { expected: graph.len(), actual: code.len() });
    }
    if seq.is_empty() {
        return Err(Error::InvalidSequence { position: 0, reason: "empty sequence".into() });
    }
    graph.check_sequence(seq)?;
    Ok(code.concat(seq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pred {
    Start,
    Cell(usize, Symbol),
}

#[derive(Debug, Clone, Default)]
struct Cell {
    count: u8,
    preds: Vec<Pred>,
}

/// The unique graph-valid sequence encoding to `bits`.
pub fn decode(graph: &TransitionGraph, code: &Codebook, bits: &BitString) -> Result<Vec<Symbol>> {
    let n = graph.len();
    if code.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: code.len() });
    }
    let input = bits.as_slice();
    let len = input.len();
    if len == 0 {
        return Err(Error::NoParse);
    }
    let mut cells: Vec<Vec<Cell>> = vec![vec![Cell::default(); n]; len + 1];
    let words = code.words();

    for (s, w) in words.iter().enumerate() {
        if input.starts_with(w.as_slice()) {
            let cell = &mut cells[w.len()][s];
            cell.count = 1;
            cell.preds.push(Pred::Start);
        }
    }
    for p in 1..len {
        for s in 0..n {
            let count = cells[p][s].count;
            if count == 0 {
                continue;
            }
            for k in graph.successors(s) {
                let w = words[k].as_slice();
                if input[p..].starts_with(w) {
                    let cell = &mut cells[p + w.len()][k];
                    cell.count = (cell.count + count).min(2);
                    cell.preds.push(Pred::Cell(p, s));
                }
            }
        }
    }

    let ends: Vec<Symbol> = (0..n).filter(|&s| cells[len][s].count > 0).collect();
    let total: u32 = ends.iter().map(|&s| u32::from(cells[len][s].count)).sum();
    match total {
        0 => Err(Error::NoParse),
        1 => Ok(walk_back(&cells, len, ends[0])),
        _ => {
            let (first, second) = if ends.len() >= 2 {
                (walk_back(&cells, len, ends[0]), walk_back(&cells, len, ends[1]))
            } else {
                split_paths(&cells, len, ends[0])
            };
            let (first, second) = if first <= second { (first, second) } else { (second, first) };
            Err(Error::AmbiguousParse { bits: bits.clone(), first, second })
        }
    }
}

/// Follows first predecessors back to the start.
fn walk_back(cells: &[Vec<Cell>], mut p: usize, mut s: Symbol) -> Vec<Symbol> {
    let mut out = vec![s];
    while let Pred::Cell(pp, ps) = cells[p][s].preds[0] {
        out.push(ps);
        p = pp;
        s = ps;
    }
    out.reverse();
    out
}

/// Two distinct parses ending at a cell whose count is at least two.
fn split_paths(cells: &[Vec<Cell>], mut p: usize, mut s: Symbol) -> (Vec<Symbol>, Vec<Symbol>) {
    let mut tail = Vec::new();
    loop {
        let preds = &cells[p][s].preds;
        tail.push(s);
        if preds.len() >= 2 {
            let path = |pred: Pred| -> Vec<Symbol> {
                let mut v = match pred {
                    Pred::Start => Vec::new(),
                    Pred::Cell(pp, ps) => walk_back(cells, pp, ps),
                };
                v.extend(tail.iter().rev());
                v
            };
            return (path(preds[0]), path(preds[1]));
        }
        match preds[0] {
            Pred::Cell(pp, ps) => {
                p = pp;
                s = ps;
            }
            Pred::Start => unreachable!("a start cell has a single parse"),
        }
    }
}
