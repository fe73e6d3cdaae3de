use std::collections::BTreeMap;

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::model::{Symbol, TransitionGraph};
use crate::sptest::Codebook;

/// One symbol delivered by a [`StreamDecoder`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub symbol: Symbol,
    /// Bit offset just past this symbol's codeword.
    pub codeword_end: usize,
    /// Number of input bits seen when the symbol was emitted.
    pub emitted_at: usize,
}

impl Emission {
    /// Bits read beyond the codeword before the symbol could be committed.
    pub fn lag(&self) -> usize {
        self.emitted_at - self.codeword_end
    }
}

/// A complete parse of `bits[..consumed]`, minus the symbols already
/// emitted.
#[derive(Debug, Clone)]
struct Hypothesis {
    pending: Vec<Symbol>,
    consumed: usize,
    last: Option<Symbol>,
    /// A different parse reaching the same `(consumed, last)` state.
    twin: Option<Vec<Symbol>>,
}

/// Incremental decoder: consumes bits one at a time and emits a symbol as
/// soon as every live hypothesis agrees on it.
#[derive(Debug, Clone)]
pub struct StreamDecoder<'a> {
    graph: &'a TransitionGraph,
    code: &'a Codebook,
    bits: BitString,
    hypotheses: Vec<Hypothesis>,
    delivered: Vec<Emission>,
    delivered_bits: usize,
    finished: bool,
}

impl<'a> StreamDecoder<'a> {
    pub fn new(graph: &'a TransitionGraph, code: &'a Codebook) -> Result<Self> {
        if code.len() != graph.len() {
            return Err(Error::DimensionMismatch { expected: graph.len(), actual: code.len() });
        }
        Ok(Self {
            graph,
            code,
            bits: BitString::new(),
            hypotheses: vec![Hypothesis { pending: Vec::new(), consumed: 0, last: None, twin: None }],
            delivered: Vec::new(),
            delivered_bits: 0,
            finished: false,
        })
    }

    /// Symbols emitted so far.
    pub fn emitted(&self) -> Vec<Symbol> {
        self.delivered.iter().map(|e| e.symbol).collect()
    }

    pub fn emissions(&self) -> &[Emission] {
        &self.delivered
    }

    /// Live hypotheses; bounded by `n · l_max` for any code.
    pub fn live_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    /// Feeds one bit and returns the symbols that became certain.
    pub fn push_bit(&mut self, bit: bool) -> Result<Vec<Emission>> {
        assert!(!self.finished, "push_bit after finish");
        self.bits.push(bit);
        let seen = self.bits.len();
        let input = self.bits.as_slice();
        let words = self.code.words();

        let mut next: BTreeMap<(usize, Option<Symbol>), Hypothesis> = BTreeMap::new();
        for h in self.hypotheses.drain(..) {
            let pending_bits = &input[h.consumed..seen];
            let candidates: Vec<Symbol> = match h.last {
                Some(s) => self.graph.successors(s).collect(),
                None => (0..words.len()).collect(),
            };
            let mut waiting = false;
            for k in candidates {
                let w = words[k].as_slice();
                if w == pending_bits {
                    let mut pending = h.pending.clone();
                    pending.push(k);
                    let twin = h.twin.as_ref().map(|t| {
                        let mut t = t.clone();
                        t.push(k);
                        t
                    });
                    merge(&mut next, Hypothesis { pending, consumed: seen, last: Some(k), twin });
                } else if w.len() > pending_bits.len() && w.starts_with(pending_bits) {
                    waiting = true;
                }
            }
            if waiting {
                merge(&mut next, h);
            }
        }
        self.hypotheses = next.into_values().collect();
        if self.hypotheses.is_empty() {
            return Err(Error::NoParse);
        }
        Ok(self.emit_agreed())
    }

    pub fn push_bits(&mut self, bits: &BitString) -> Result<Vec<Emission>> {
        let mut out = Vec::new();
        for &b in bits.as_slice() {
            out.extend(self.push_bit(b)?);
        }
        Ok(out)
    }

    /// Ends the stream; emits whatever remains of the unique complete parse.
    pub fn finish(&mut self) -> Result<Vec<Emission>> {
        self.finished = true;
        let seen = self.bits.len();
        let complete: Vec<&Hypothesis> =
            self.hypotheses.iter().filter(|h| h.consumed == seen && h.last.is_some()).collect();
        let prefix = self.emitted();
        let full = |pending: &[Symbol]| -> Vec<Symbol> {
            let mut v = prefix.clone();
            v.extend_from_slice(pending);
            v
        };
        let ambiguous = match complete.as_slice() {
            [] => return Err(Error::NoParse),
            [only] => only.twin.as_ref().map(|t| (full(&only.pending), full(t))),
            [a, b, ..] => Some((full(&a.pending), full(&b.pending))),
        };
        if let Some((x, y)) = ambiguous {
            let (first, second) = if x <= y { (x, y) } else { (y, x) };
            return Err(Error::AmbiguousParse { bits: self.bits.clone(), first, second });
        }
        let rest = complete[0].pending.clone();
        let mut out = Vec::new();
        for s in rest {
            out.push(self.record(s, seen));
        }
        self.hypotheses.clear();
        Ok(out)
    }

    fn record(&mut self, symbol: Symbol, emitted_at: usize) -> Emission {
        self.delivered_bits += self.code.word(symbol).len();
        let e = Emission { symbol, codeword_end: self.delivered_bits, emitted_at };
        self.delivered.push(e.clone());
        e
    }

    fn emit_agreed(&mut self) -> Vec<Emission> {
        let seen = self.bits.len();
        let mut out = Vec::new();
        loop {
            let mut heads = self.hypotheses.iter().flat_map(|h| {
                std::iter::once(h.pending.first()).chain(h.twin.as_ref().map(|t| t.first()))
            });
            let Some(Some(&first)) = heads.next() else { break };
            if !heads.all(|x| x == Some(&first)) {
                break;
            }
            for h in &mut self.hypotheses {
                h.pending.remove(0);
                if let Some(t) = &mut h.twin {
                    t.remove(0);
                }
            }
            out.push(self.record(first, seen));
        }
        out
    }
}

fn merge(into: &mut BTreeMap<(usize, Option<Symbol>), Hypothesis>, h: Hypothesis) {
    use std::collections::btree_map::Entry;
    match into.entry((h.consumed, h.last)) {
        Entry::Vacant(v) => {
            v.insert(h);
        }
        Entry::Occupied(mut o) => {
            let kept = o.get_mut();
            if kept.twin.is_none() && kept.pending != h.pending {
                kept.twin = Some(h.pending);
            }
        }
    }
}

/// Runs a [`StreamDecoder`] over a complete input and returns every
/// emission in order.
pub fn stream_decode(graph: &TransitionGraph, code: &Codebook, bits: &BitString) -> Result<Vec<Emission>> {
    let mut dec = StreamDecoder::new(graph, code)?;
    let mut out = dec.push_bits(bits)?;
    out.extend(dec.finish()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::codec::{decode, encode};
    use crate::model::enumerate_valid_sequences;
    use crate::sptest::{delay_bound, sp_test};

    const A: Symbol = 0;
    const B: Symbol = 1;
    const C: Symbol = 2;
    const D: Symbol = 3;

    fn fig1() -> TransitionGraph {
        TransitionGraph::new(vec![
            vec![true, false, true],
            vec![true, true, true],
            vec![true, true, true],
        ])
        .unwrap()
    }

    fn four_a() -> TransitionGraph {
        TransitionGraph::new(vec![
            vec![true, false, true, false],
            vec![false, true, false, true],
            vec![true; 4],
            vec![true; 4],
        ])
        .unwrap()
    }

    fn four_b() -> TransitionGraph {
        TransitionGraph::new(vec![
            vec![true, false, true, true],
            vec![false, true, true, true],
            vec![false, true, true, true],
            vec![true, false, true, true],
        ])
        .unwrap()
    }

    fn four_code() -> Codebook {
        Codebook::parse(&["0", "1", "01", "10"]).unwrap()
    }

    #[test]
    fn first_symbol_after_two_bits() {
        let g = four_a();
        let c = four_code();
        let mut dec = StreamDecoder::new(&g, &c).unwrap();
        assert!(dec.push_bit(false).unwrap().is_empty());
        let e = dec.push_bit(false).unwrap();
        assert_eq!(e.first().map(|e| (e.symbol, e.emitted_at)), Some((A, 2)));
        dec.push_bits(&bits("110")).unwrap();
        dec.finish().unwrap();
        assert_eq!(dec.emitted(), vec![A, C, D]);
    }

    #[test]
    fn unbounded_delay_holds_everything() {
        let g = four_b();
        let c = four_code();
        let mut dec = StreamDecoder::new(&g, &c).unwrap();
        assert!(dec.push_bits(&bits("0101010101")).unwrap().is_empty());
        let rest = dec.finish().unwrap();
        assert_eq!(rest.iter().map(|e| e.symbol).collect::<Vec<_>>(), vec![C; 5]);
    }

    #[test]
    fn single_word() {
        let g = fig1();
        let c = Codebook::parse(&["0", "1", "01"]).unwrap();
        let out = stream_decode(&g, &c, &bits("1")).unwrap();
        assert_eq!(out, vec![Emission { symbol: B, codeword_end: 1, emitted_at: 1 }]);
    }

    #[test]
    fn errors_match_batch_decoder() {
        let g = TransitionGraph::from_edges(3, &[(A, A), (A, B), (B, A), (B, C), (C, B), (C, C)]).unwrap();
        let c = Codebook::parse(&["0", "1", "11"]).unwrap();
        assert_eq!(stream_decode(&g, &c, &bits("1111")), decode(&g, &c, &bits("1111")).map(|_| vec![]));
        let c2 = Codebook::parse(&["0", "10", "110"]).unwrap();
        assert_eq!(stream_decode(&fig1(), &c2, &bits("11")), Err(Error::NoParse));
        assert_eq!(stream_decode(&fig1(), &c2, &BitString::new()), Err(Error::NoParse));
    }

    #[test]
    fn lag_within_delay_bound_fig1() {
        let g = fig1();
        let c = Codebook::parse(&["0", "1", "01"]).unwrap();
        let bound = delay_bound(&sp_test(&g, &c).unwrap(), &c).unwrap();
        assert_eq!(bound, 4);
        let mut max_lag = 0;
        for k in 1..=16 {
            for s in enumerate_valid_sequences(&g, k, None).unwrap() {
                let b = encode(&g, &c, &s).unwrap();
                if b.len() > 16 {
                    continue;
                }
                let out = stream_decode(&g, &c, &b).unwrap();
                assert_eq!(out.iter().map(|e| e.symbol).collect::<Vec<_>>(), s);
                max_lag = max_lag.max(out.iter().map(Emission::lag).max().unwrap());
            }
        }
        assert!(max_lag <= bound);
        assert_eq!(max_lag, 1);
    }

    #[test]
    fn emitted_prefix_of_batch_result() {
        let g = four_b();
        let c = four_code();
        for k in 1..=6 {
            for s in enumerate_valid_sequences(&g, k, None).unwrap() {
                let b = encode(&g, &c, &s).unwrap();
                let mut dec = StreamDecoder::new(&g, &c).unwrap();
                for &bit in b.as_slice() {
                    dec.push_bit(bit).unwrap();
                    let so_far = dec.emitted();
                    assert_eq!(&s[..so_far.len()], &so_far[..]);
                    assert!(dec.live_hypotheses() <= g.len() * c.max_len() + 1);
                }
                dec.finish().unwrap();
                assert_eq!(dec.emitted(), s);
            }
        }
    }

    #[test]
    fn long_stream_stays_small() {
        let g = four_a();
        let c = four_code();
        let seq: Vec<Symbol> = (0..2000).map(|i| [A, C, D, B, D, C][i % 6]).collect();
        let b = encode(&g, &c, &seq).unwrap();
        let out = stream_decode(&g, &c, &b).unwrap();
        assert_eq!(out.len(), seq.len());
        assert!(out.iter().all(|e| e.lag() <= 4));
    }
}
