//! Brute-force ground truth and exhaustive codebook search.
//!
//! [`brute_force_ud`] looks for two distinct valid symbol sequences with the
//! same encoding by walking explicit pairs of sequences, without any of the
//! suffix-set machinery of [`crate::sptest`]. [`search_codebooks`] enumerates
//! small codebooks and keeps the ones that the suffix-set test accepts.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{self, Rational};
use crate::model::{self, enumerate_valid_sequences, LengthVector, MarkovSource, Symbol, TransitionGraph};
use crate::spectral::{counting_precheck, kraft_check};
use crate::sptest::{sp_test, Codebook, SpVerdict};

/// Pair states popped by [`brute_force_ud`] before giving up.
pub const BRUTE_FORCE_WORK_LIMIT: usize = 5_000_000;
/// Largest alphabet accepted by [`search_codebooks`].
pub const SEARCH_MAX_SYMBOLS: usize = 6;
/// Longest codeword accepted by [`search_codebooks`].
pub const SEARCH_MAX_LEN: u32 = 4;
/// Upper limit on codebooks [`search_codebooks`] will run the test on.
pub const SEARCH_CANDIDATE_LIMIT: u128 = 20_000_000;

/// Two distinct valid sequences with the same encoding. `seq_a < seq_b`
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CollisionWitness {
    pub seq_a: Vec<Symbol>,
    pub seq_b: Vec<Symbol>,
    pub bits: BitString,
}

impl CollisionWitness {
    pub fn new(x: Vec<Symbol>, y: Vec<Symbol>, bits: BitString) -> Self {
        let (seq_a, seq_b) = if x <= y { (x, y) } else { (y, x) };
        Self { seq_a, seq_b, bits }
    }

    /// Both sequences valid, distinct, and encoding to `bits`.
    pub fn verify(&self, graph: &TransitionGraph, code: &Codebook) -> bool {
        self.seq_a != self.seq_b
            && graph.is_valid_sequence(&self.seq_a)
            && graph.is_valid_sequence(&self.seq_b)
            && code.concat(&self.seq_a) == self.bits
            && code.concat(&self.seq_b) == self.bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct PairState {
    bits: usize,
    terminal: bool,
    first: Vec<Symbol>,
    second: Vec<Symbol>,
    /// Which of `first`/`second` is behind; meaningless for terminal states.
    lag_is_first: bool,
}

/// Searches for a collision whose common encoding is at most `bit_budget`
/// bits. Returns the collision with the shortest encoding, ties broken by
/// lexicographic order of the sequence pair.
pub fn brute_force_ud(
    graph: &TransitionGraph,
    code: &Codebook,
    bit_budget: usize,
) -> Result<Option<CollisionWitness>> {
    let n = graph.len();
    if code.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: code.len() });
    }
    let words = code.words();
    let mut heap: BinaryHeap<Reverse<PairState>> = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Reverse<PairState>>, lag: Vec<Symbol>, lead: Vec<Symbol>, bits: usize, terminal: bool| {
        let (first, second, lag_is_first) = if lag <= lead { (lag, lead, true) } else { (lead, lag, false) };
        heap.push(Reverse(PairState { bits, terminal, first, second, lag_is_first }));
    };

    for i in 0..n {
        for j in 0..n {
            if i != j
                && words[j].len() > words[i].len()
                && words[j].len() <= bit_budget
                && words[j].starts_with(words[i].as_slice())
            {
                push(&mut heap, vec![i], vec![j], words[j].len(), false);
            }
        }
    }

    let mut work = 0usize;
    while let Some(Reverse(state)) = heap.pop() {
        if state.terminal {
            let bits = code.concat(&state.first);
            return Ok(Some(CollisionWitness::new(state.first, state.second, bits)));
        }
        work += 1;
        if work > BRUTE_FORCE_WORK_LIMIT {
            return Err(Error::TooLarge(format!(
                "collision search exceeded {BRUTE_FORCE_WORK_LIMIT} states at {} bits",
                state.bits
            )));
        }
        let (lag, lead) = if state.lag_is_first {
            (state.first, state.second)
        } else {
            (state.second, state.first)
        };
        let lead_bits = code.concat(&lead);
        let lag_len: usize = lag.iter().map(|&s| words[s].len()).sum();
        let dangling = &lead_bits.as_slice()[lag_len..];
        let last = *lag.last().expect("nonempty");
        for k in graph.successors(last) {
            let w = words[k].as_slice();
            let mut next = lag.clone();
            next.push(k);
            if w == dangling {
                push(&mut heap, next, lead.clone(), lead_bits.len(), true);
            } else if w.len() > dangling.len() && w.starts_with(dangling) {
                let bits = lag_len + w.len();
                if bits <= bit_budget {
                    push(&mut heap, lead.clone(), next, bits, false);
                }
            } else if dangling.len() > w.len() && dangling.starts_with(w) {
                push(&mut heap, next, lead.clone(), lead_bits.len(), false);
            }
        }
    }
    Ok(None)
}

/// Counts `c_l` of valid `k`-sequences whose encodings have `l` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClProfile {
    pub k: usize,
    pub counts: BTreeMap<u32, u64>,
}

impl ClProfile {
    /// `c_l ≤ 2^l` for every `l`.
    pub fn within_counting_bound(&self) -> bool {
        self.counts.iter().all(|(&l, &c)| l >= 64 || c <= 1u64 << l)
    }

    /// `Σ_l c_l 2^{-l}`.
    pub fn weighted_sum(&self) -> Rational {
        self.counts.iter().fold(Rational::zero(), |acc, (&l, &c)| {
            acc + linalg::dyadic(l) * linalg::rat(c as i64, 1)
        })
    }
}

/// Enumerates the valid `k`-sequences and tallies their total lengths.
pub fn c_l_profile(graph: &TransitionGraph, lengths: &LengthVector, k: usize) -> Result<ClProfile> {
    if lengths.len() != graph.len() {
        return Err(Error::DimensionMismatch { expected: graph.len(), actual: lengths.len() });
    }
    let mut counts = BTreeMap::new();
    for seq in enumerate_valid_sequences(graph, k, None)? {
        let total: u32 = seq.iter().map(|&s| lengths.get(s)).sum();
        *counts.entry(total).or_insert(0u64) += 1;
    }
    Ok(ClProfile { k, counts })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchEntry {
    pub codebook: Codebook,
    /// `μ·lᵀ` when a source was supplied.
    pub expected_length: Option<Rational>,
    pub verdict: SpVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Sorted by expected length (or total length without a source), then
    /// by codewords.
    pub entries: Vec<SearchEntry>,
    pub length_vectors_total: usize,
    pub pruned_by_counting: usize,
    pub pruned_by_kraft: usize,
    pub candidates_tested: usize,
}

/// Exhaustive search for decodable codebooks with word lengths up to
/// `max_len`.
///
/// Length vectors are pruned by the counting bound and the spectral
/// condition. Codebooks are only considered up to global bit complement:
/// the representative has a first codeword starting with `0`.
pub fn search_codebooks(
    graph: &TransitionGraph,
    max_len: u32,
    source: Option<&MarkovSource>,
) -> Result<SearchResult> {
    let n = graph.len();
    if n > SEARCH_MAX_SYMBOLS || max_len == 0 || max_len > SEARCH_MAX_LEN {
        return Err(Error::TooLarge(format!(
            "search needs at most {SEARCH_MAX_SYMBOLS} symbols and 1 <= max_len <= {SEARCH_MAX_LEN} \
             (got {n} symbols, max_len {max_len})"
        )));
    }
    let mu = match source {
        Some(src) if src.graph() != graph => {
            return Err(Error::InvalidSource("source graph differs from search graph".into()))
        }
        Some(src) => Some(model::stationary_distribution(src)?),
        None => None,
    };

    let mut vectors = Vec::new();
    let mut current = vec![1u32; n];
    loop {
        vectors.push(current.clone());
        let Some(pos) = (0..n).rev().find(|&i| current[i] < max_len) else { break };
        current[pos] += 1;
        for x in &mut current[pos + 1..] {
            *x = 1;
        }
    }
    let length_vectors_total = vectors.len();

    let mut pruned_by_counting = 0;
    let mut pruned_by_kraft = 0;
    let mut survivors = Vec::new();
    for v in vectors {
        let l = LengthVector::new(v)?;
        if !counting_precheck(&l) {
            pruned_by_counting += 1;
        } else if !kraft_check(graph, &l)?.classification.is_admissible() {
            pruned_by_kraft += 1;
        } else {
            survivors.push(l);
        }
    }
    let candidates: u128 = survivors
        .iter()
        .map(|l| l.as_slice().iter().map(|&x| 1u128 << x).product::<u128>())
        .sum();
    if candidates > SEARCH_CANDIDATE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{candidates} candidate codebooks exceed the search limit {SEARCH_CANDIDATE_LIMIT}; \
             lower max_len or the alphabet size"
        )));
    }

    let shards: Vec<(Vec<SearchEntry>, usize)> = survivors
        .par_iter()
        .map(|l| search_lengths(graph, l, mu.as_ref()))
        .collect::<Result<_>>()?;
    let candidates_tested = shards.iter().map(|(_, t)| t).sum();
    let mut entries: Vec<SearchEntry> = shards.into_iter().flat_map(|(e, _)| e).collect();
    entries.sort_by(|a, b| {
        let key = |e: &SearchEntry| {
            e.expected_length.clone().unwrap_or_else(|| {
                linalg::rat(e.codebook.lengths().as_slice().iter().map(|&x| i64::from(x)).sum(), 1)
            })
        };
        key(a).cmp(&key(b)).then_with(|| a.codebook.words().cmp(b.codebook.words()))
    });
    Ok(SearchResult {
        entries,
        length_vectors_total,
        pruned_by_counting,
        pruned_by_kraft,
        candidates_tested,
    })
}

fn search_lengths(
    graph: &TransitionGraph,
    lengths: &LengthVector,
    mu: Option<&model::Distribution>,
) -> Result<(Vec<SearchEntry>, usize)> {
    let expected_length = mu.map(|m| linalg::dot(m.probs(), &lengths.as_rationals()));
    let mut out = Vec::new();
    let mut tested = 0;
    let mut chosen: Vec<BitString> = Vec::with_capacity(lengths.len());
    assign_words(lengths.as_slice(), &mut chosen, &mut |words| {
        tested += 1;
        let code = Codebook::new(words.to_vec())?;
        let report = sp_test(graph, &code)?;
        if report.verdict.is_decodable() {
            out.push(SearchEntry {
                codebook: code,
                expected_length: expected_length.clone(),
                verdict: report.verdict,
            });
        }
        Ok(())
    })?;
    Ok((out, tested))
}

fn assign_words(
    lengths: &[u32],
    chosen: &mut Vec<BitString>,
    visit: &mut dyn FnMut(&[BitString]) -> Result<()>,
) -> Result<()> {
    let i = chosen.len();
    if i == lengths.len() {
        return visit(chosen);
    }
    let l = lengths[i];
    for value in 0..(1u32 << l) {
        let word = BitString::from_bits((0..l).rev().map(|b| value >> b & 1 == 1).collect());
        if i == 0 && word.as_slice()[0] {
            continue;
        }
        if chosen.contains(&word) {
            continue;
        }
        chosen.push(word);
        assign_words(lengths, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::linalg::rat;
    use crate::spectral::kraft_lhs;

    const A: Symbol = 0;
    const B: Symbol = 1;
    const C: Symbol = 2;

    fn fig1_source() -> MarkovSource {
        MarkovSource::with_uniform_start(vec![
            vec![rat(1, 2), rat(0, 1), rat(1, 2)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
        ])
        .unwrap()
    }

    fn three_counter() -> TransitionGraph {
        TransitionGraph::from_edges(3, &[(A, A), (A, B), (B, A), (B, C), (C, B), (C, C)]).unwrap()
    }

    fn lv(v: &[u32]) -> LengthVector {
        LengthVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let code = Codebook::parse(&["0", "1", "11"]).unwrap();
        let w = brute_force_ud(&three_counter(), &code, 8).unwrap().unwrap();
        assert_eq!((w.seq_a.clone(), w.seq_b.clone(), w.bits.clone()), (vec![B, C], vec![C, B], bits("111")));
        assert!(w.verify(&three_counter(), &code));

        let code = Codebook::parse(&["0", "1", "01"]).unwrap();
        assert_eq!(brute_force_ud(fig1_source().graph(), &code, 16).unwrap(), None);

        let full = TransitionGraph::complete(3).unwrap();
        let w = brute_force_ud(&full, &code, 4).unwrap().unwrap();
        assert_eq!((w.seq_a, w.seq_b, w.bits), (vec![A, B], vec![C], bits("01")));
    }

    #[test]
    fn brute_force_respects_budget() {
        let code = Codebook::parse(&["0", "1", "11"]).unwrap();
        assert_eq!(brute_force_ud(&three_counter(), &code, 2).unwrap(), None);
        assert!(brute_force_ud(&three_counter(), &code, 3).unwrap().is_some());
    }

    #[test]
    fn brute_force_agrees_with_plain_enumeration() {
        // Independent check by listing every valid sequence up to 8 bits.
        let code = Codebook::parse(&["0", "1", "11"]).unwrap();
        let g = three_counter();
        let mut by_bits: BTreeMap<BitString, Vec<Vec<Symbol>>> = BTreeMap::new();
        for k in 1..=8 {
            for s in enumerate_valid_sequences(&g, k, None).unwrap() {
                let b = code.concat(&s);
                if b.len() <= 8 {
                    by_bits.entry(b).or_default().push(s);
                }
            }
        }
        let shortest = by_bits.iter().filter(|(_, v)| v.len() > 1).map(|(b, _)| b.len()).min();
        assert_eq!(shortest, Some(3));
        let mut at_1111 = by_bits[&bits("1111")].clone();
        at_1111.sort();
        assert_eq!(at_1111, vec![vec![B, C, B], vec![C, C]]);
    }

    #[test]
    fn c_l_examples() {
        let g = fig1_source().graph().clone();
        let l = lv(&[1, 1, 2]);
        let p = c_l_profile(&g, &l, 2).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(2, 3), (3, 4), (4, 1)]));
        assert!(p.within_counting_bound());
        assert_eq!(p.weighted_sum(), kraft_lhs(&g, &l, 2).unwrap());
        let p1 = c_l_profile(&g, &l, 1).unwrap();
        assert_eq!(p1.counts, BTreeMap::from([(1, 2), (2, 1)]));
    }

    #[test]
    fn counting_bound_violation_detected() {
        let g = TransitionGraph::complete(3).unwrap();
        let p = c_l_profile(&g, &lv(&[1, 1, 1]), 1).unwrap();
        assert!(!p.within_counting_bound());
    }

    #[test]
    fn search_fig1() {
        let src = fig1_source();
        let r = search_codebooks(src.graph(), 2, Some(&src)).unwrap();
        let best = &r.entries[0];
        assert_eq!(best.expected_length, Some(rat(4, 3)));
        assert!(r.entries.iter().any(|e| e.codebook == Codebook::parse(&["0", "1", "01"]).unwrap()));
        assert!(r.entries.iter().all(|e| !e.codebook.word(0).as_slice()[0]));
        for pair in r.entries.windows(2) {
            assert!(pair[0].expected_length <= pair[1].expected_length);
        }
    }

    #[test]
    fn search_two_symbols() {
        let g = TransitionGraph::complete(2).unwrap();
        let r = search_codebooks(&g, 1, None).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].codebook, Codebook::parse(&["0", "1"]).unwrap());
    }

    #[test]
    fn search_guards() {
        let g = TransitionGraph::complete(7).unwrap();
        assert!(matches!(search_codebooks(&g, 2, None), Err(Error::TooLarge(_))));
        let g = TransitionGraph::complete(2).unwrap();
        assert!(matches!(search_codebooks(&g, 5, None), Err(Error::TooLarge(_))));
        assert!(matches!(search_codebooks(&g, 0, None), Err(Error::TooLarge(_))));
    }

    #[test]
    fn search_results_pass_oracle() {
        let src = fig1_source();
        let r = search_codebooks(src.graph(), 2, Some(&src)).unwrap();
        for e in &r.entries {
            assert_eq!(brute_force_ud(src.graph(), &e.codebook, 16).unwrap(), None, "{}", e.codebook);
        }
    }
}
