//! Per-state Huffman baseline: one prefix code for the first symbol and
//! one for each row of the transition matrix.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{self, Rational};
use crate::model::{step_distribution, MarkovSource, Symbol};

/// Prefix code over the support of one distribution. Symbols outside the
/// support have no codeword. A support of size one gets the empty word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubCode {
    words: Vec<Option<BitString>>,
}

impl SubCode {
    pub fn word(&self, s: Symbol) -> Option<&BitString> {
        self.words[s].as_ref()
    }

    pub fn words(&self) -> &[Option<BitString>] {
        &self.words
    }

    pub fn expected_length(&self, probs: &[Rational]) -> Rational {
        probs.iter().zip(&self.words).fold(Rational::zero(), |acc, (p, w)| match w {
            Some(w) => acc + p * linalg::rat(w.len() as i64, 1),
            None => acc,
        })
    }

    fn decode_one(&self, input: &[bool]) -> Option<(Symbol, usize)> {
        self.words.iter().enumerate().find_map(|(s, w)| {
            let w = w.as_ref()?;
            input.starts_with(w.as_slice()).then_some((s, w.len()))
        })
    }
}

#[derive(Debug)]
enum Tree {
    Leaf(Symbol),
    Node(Box<Tree>, Box<Tree>),
}

/// Huffman code for `probs`, zero-probability symbols excluded.
///
/// The two lightest trees are merged first, ties going to the tree with
/// the lowest symbol index; the `0` branch leads to the subtree with the
/// lower minimum index.
pub fn huffman_code(probs: &[Rational]) -> SubCode {
    let mut heap: BinaryHeap<Reverse<(Rational, Symbol, usize)>> = BinaryHeap::new();
    let mut trees: Vec<Option<Tree>> = Vec::new();
    for (s, p) in probs.iter().enumerate() {
        if !p.is_zero() {
            heap.push(Reverse((p.clone(), s, trees.len())));
            trees.push(Some(Tree::Leaf(s)));
        }
    }
    let mut words = vec![None; probs.len()];
    while heap.len() > 1 {
        let Reverse((wa, ma, ia)) = heap.pop().expect("two trees");
        let Reverse((wb, mb, ib)) = heap.pop().expect("two trees");
        let ta = trees[ia].take().expect("live tree");
        let tb = trees[ib].take().expect("live tree");
        let node = if ma < mb {
            Tree::Node(Box::new(ta), Box::new(tb))
        } else {
            Tree::Node(Box::new(tb), Box::new(ta))
        };
        heap.push(Reverse((wa + wb, ma.min(mb), trees.len())));
        trees.push(Some(node));
    }
    if let Some(Reverse((_, _, root))) = heap.pop() {
        let mut stack = vec![(trees[root].take().expect("root"), BitString::new())];
        while let Some((tree, prefix)) = stack.pop() {
            match tree {
                Tree::Leaf(s) => words[s] = Some(prefix),
                Tree::Node(zero, one) => {
                    let mut z = prefix.clone();
                    z.push(false);
                    let mut o = prefix;
                    o.push(true);
                    stack.push((*zero, z));
                    stack.push((*one, o));
                }
            }
        }
    }
    SubCode { words }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionalHuffman {
    pub first: SubCode,
    pub rows: Vec<SubCode>,
}

pub fn build_conditional_huffman(src: &MarkovSource) -> ConditionalHuffman {
    ConditionalHuffman {
        first: huffman_code(src.initial().probs()),
        rows: src.transitions().iter().map(|r| huffman_code(r)).collect(),
    }
}

impl ConditionalHuffman {
    fn code_for(&self, prev: Option<Symbol>) -> &SubCode {
        match prev {
            None => &self.first,
            Some(p) => &self.rows[p],
        }
    }

    /// Encodes `seq`, switching codes on the previous symbol.
    pub fn encode(&self, seq: &[Symbol]) -> Result<BitString> {
        let mut out = BitString::new();
        let mut prev = None;
        for (i, &s) in seq.iter().enumerate() {
            let code = self.code_for(prev);
            let w = code.words.get(s).and_then(Option::as_ref).ok_or_else(|| Error::InvalidSequence {
                position: i,
                reason: "symbol has zero probability in this state".into(),
            })?;
            out.extend_from(w);
            prev = Some(s);
        }
        Ok(out)
    }

    /// Decodes exactly `count` symbols; forced symbols take no bits, so the
    /// count cannot be recovered from the bits alone.
    pub fn decode(&self, bits: &BitString, count: usize) -> Result<Vec<Symbol>> {
        let input = bits.as_slice();
        let mut pos = 0;
        let mut prev = None;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let (s, len) = self.code_for(prev).decode_one(&input[pos..]).ok_or(Error::NoParse)?;
            out.push(s);
            pos += len;
            prev = Some(s);
        }
        if pos != input.len() {
            return Err(Error::NoParse);
        }
        Ok(out)
    }
}

/// Expected bits spent on `X_1 … X_k`.
pub fn huffman_expected_length(src: &MarkovSource, k: usize) -> Rational {
    assert!(k >= 1, "block length must be positive");
    let ch = build_conditional_huffman(src);
    let row_lengths: Vec<Rational> = ch
        .rows
        .iter()
        .zip(src.transitions())
        .map(|(code, row)| code.expected_length(row))
        .collect();
    let mut total = ch.first.expected_length(src.initial().probs());
    for i in 1..k {
        total += linalg::dot(step_distribution(src, i).probs(), &row_lengths);
    }
    total
}
