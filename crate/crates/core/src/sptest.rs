//! Sardinas–Patterson unique-decodability test with transition constraints.
//!
//! Each dangling suffix carries two labels: `ₗB_m` means two parses of the
//! same bit prefix are in flight, the lagging one ends with symbol `l`, the
//! leading one ends with symbol `m`, and the leading parse is ahead by the
//! bits `B`. Only codewords that may follow `l` are compared against `B`:
//!
//! * (a) a follower equals `B`: the parses meet, the code is ambiguous;
//! * (b) `B` is a proper prefix of a follower `W_r = B·C`: yields `ₘC_r`;
//! * (c) a follower `W_s` is a proper prefix of `B = W_s·D`: yields `ₛD_m`.
//!
//! The sequence of sets either reaches the empty set (finite decoding
//! delay), revisits an earlier set (unbounded delay), or hits (a).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::model::{LengthVector, Symbol, TransitionGraph};
use crate::search::CollisionWitness;

/// Symbol-to-codeword assignment; not required to be prefix-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Codebook {
    words: Vec<BitString>,
}

impl Codebook {
    /// Words must be nonempty and pairwise distinct.
    pub fn new(words: Vec<BitString>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidCodebook("codebook has no words".into()));
        }
        if let Some(i) = words.iter().position(BitString::is_empty) {
            return Err(Error::InvalidCodebook(format!("codeword {i} is empty")));
        }
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                if words[i] == words[j] {
                    return Err(Error::InvalidCodebook(format!(
                        "codewords {i} and {j} are both {}",
                        words[i]
                    )));
                }
            }
        }
        Ok(Self { words })
    }

    /// Parses text codewords such as `["0", "1", "01"]`.
    pub fn parse(words: &[&str]) -> Result<Self> {
        Self::new(words.iter().map(|w| w.parse()).collect::<Result<_>>()?)
    }

    pub fn words(&self) -> &[BitString] {
        &self.words
    }

    pub fn word(&self, s: Symbol) -> &BitString {
        &self.words[s]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn lengths(&self) -> LengthVector {
        LengthVector::new(self.words.iter().map(|w| w.len() as u32).collect())
            .expect("codewords are nonempty")
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(BitString::len).max().unwrap_or(0)
    }

    pub fn is_prefix_free(&self) -> bool {
        self.words.iter().enumerate().all(|(i, a)| {
            self.words.iter().enumerate().all(|(j, b)| i == j || !b.starts_with(a.as_slice()))
        })
    }

    /// Concatenation of the codewords of `seq`, without validity checks.
    pub fn concat(&self, seq: &[Symbol]) -> BitString {
        let mut out = BitString::new();
        for &s in seq {
            out.extend_from(&self.words[s]);
        }
        out
    }

    /// The same codebook with every bit flipped.
    pub fn complement(&self) -> Codebook {
        Codebook {
            words: self
                .words
                .iter()
                .map(|w| BitString::from_bits(w.as_slice().iter().map(|b| !b).collect()))
                .collect(),
        }
    }
}

impl fmt::Display for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

/// A dangling suffix `ₗB_m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LabeledSuffix {
    pub left: Symbol,
    pub bits: BitString,
    pub right: Symbol,
}

impl LabeledSuffix {
    pub fn new(left: Symbol, bits: BitString, right: Symbol) -> Self {
        debug_assert!(!bits.is_empty());
        Self { left, bits, right }
    }
}

impl fmt::Display for LabeledSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.left, self.bits, self.right)
    }
}

/// `F_i`: codewords allowed to follow symbol `i`, as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowSets(Vec<Vec<Symbol>>);

impl FollowSets {
    pub fn new(graph: &TransitionGraph) -> Self {
        Self((0..graph.len()).map(|i| graph.successors(i).collect()).collect())
    }

    pub fn of(&self, s: Symbol) -> &[Symbol] {
        &self.0[s]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SpVerdict {
    DecodableFiniteDelay,
    DecodableInfiniteDelay,
    NotDecodable,
}

impl SpVerdict {
    pub fn is_decodable(self) -> bool {
        self != SpVerdict::NotDecodable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpReport {
    pub verdict: SpVerdict,
    /// `S_1, S_2, …` in canonical order. Ends with the empty set (finite
    /// delay) or with the first set equal to an earlier one (unbounded
    /// delay). For undecodable codes, ends with the set in which rule (a)
    /// fired.
    pub sets: Vec<Vec<LabeledSuffix>>,
    /// 1-based index of the earlier set that the last set repeats.
    pub repeat_of: Option<usize>,
    pub delay_bound_bits: Option<usize>,
    pub witness: Option<CollisionWitness>,
    /// Number of sets derived after `S_1`.
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct Origin {
    lag: Vec<Symbol>,
    lead: Vec<Symbol>,
}

type SuffixSet = BTreeMap<LabeledSuffix, Origin>;

/// Runs the test assuming every symbol may start a sequence.
pub fn sp_test(graph: &TransitionGraph, code: &Codebook) -> Result<SpReport> {
    sp_test_from(graph, code, &vec![true; graph.len()])
}

/// Runs the test for sequences whose first symbol lies in `initial`.
///
/// Two parses can diverge either at the start (both first symbols in
/// `initial`) or right after a shared prefix ending in some reachable
/// symbol `s` (both next symbols follow `s`); the first set is seeded from
/// both kinds of divergence point.
pub fn sp_test_from(graph: &TransitionGraph, code: &Codebook, initial: &[bool]) -> Result<SpReport> {
    let n = graph.len();
    if code.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: code.len() });
    }
    if initial.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: initial.len() });
    }
    let follow = FollowSets::new(graph);
    let words = code.words();

    // Divergence contexts: None = sequence start, Some(path) = shared prefix.
    let mut contexts: Vec<(Vec<Symbol>, Vec<bool>)> = Vec::new();
    if initial.iter().any(|&b| b) {
        contexts.push((Vec::new(), initial.to_vec()));
    }
    for path in reachable_paths(graph, initial).into_iter().flatten() {
        let last = *path.last().expect("nonempty path");
        let mut allowed = vec![false; n];
        for j in follow.of(last) {
            allowed[*j] = true;
        }
        contexts.push((path, allowed));
    }

    let mut current = SuffixSet::new();
    for (prefix, allowed) in &contexts {
        for i in (0..n).filter(|&i| allowed[i]) {
            for j in (0..n).filter(|&j| allowed[j] && j != i) {
                if words[j].len() > words[i].len() && words[j].starts_with(words[i].as_slice()) {
                    let suffix = LabeledSuffix::new(i, words[j].suffix_from(words[i].len()), j);
                    current.entry(suffix).or_insert_with(|| Origin {
                        lag: extended(prefix, i),
                        lead: extended(prefix, j),
                    });
                }
            }
        }
    }

    let l_max = code.max_len();
    let mut sets: Vec<Vec<LabeledSuffix>> = Vec::new();
    let mut seen: HashMap<Vec<LabeledSuffix>, usize> = HashMap::new();
    let mut iterations = 0usize;
    loop {
        let canonical: Vec<LabeledSuffix> = current.keys().cloned().collect();
        sets.push(canonical.clone());
        if canonical.is_empty() {
            return Ok(SpReport {
                verdict: SpVerdict::DecodableFiniteDelay,
                delay_bound_bits: Some(sets.len() * l_max),
                sets,
                repeat_of: None,
                witness: None,
                iterations,
            });
        }
        if let Some(&earlier) = seen.get(&canonical) {
            return Ok(SpReport {
                verdict: SpVerdict::DecodableInfiniteDelay,
                sets,
                repeat_of: Some(earlier),
                delay_bound_bits: None,
                witness: None,
                iterations,
            });
        }
        seen.insert(canonical, sets.len());

        let mut next = SuffixSet::new();
        for (suffix, origin) in &current {
            for &k in follow.of(suffix.left) {
                let w = &words[k];
                let b = &suffix.bits;
                if w == b {
                    let witness = CollisionWitness::new(
                        extended(&origin.lag, k),
                        origin.lead.clone(),
                        code.concat(&origin.lead),
                    );
                    return Ok(SpReport {
                        verdict: SpVerdict::NotDecodable,
                        sets,
                        repeat_of: None,
                        delay_bound_bits: None,
                        witness: Some(witness),
                        iterations,
                    });
                }
                if w.len() > b.len() && w.starts_with(b.as_slice()) {
                    let s = LabeledSuffix::new(suffix.right, w.suffix_from(b.len()), k);
                    next.entry(s).or_insert_with(|| Origin {
                        lag: origin.lead.clone(),
                        lead: extended(&origin.lag, k),
                    });
                } else if b.len() > w.len() && b.starts_with(w.as_slice()) {
                    let s = LabeledSuffix::new(k, b.suffix_from(w.len()), suffix.right);
                    next.entry(s).or_insert_with(|| Origin {
                        lag: extended(&origin.lag, k),
                        lead: origin.lead.clone(),
                    });
                }
            }
        }
        current = next;
        iterations += 1;
    }
}

/// The unconstrained test: every transition allowed.
pub fn classic_sp_test(code: &Codebook) -> Result<SpReport> {
    sp_test(&TransitionGraph::complete(code.len())?, code)
}

/// Decoding delay upper bound in bits: `(index of the empty set) · l_max`.
///
/// This is coarser than the true delay.
pub fn delay_bound(report: &SpReport, code: &Codebook) -> Result<usize> {
    match report.verdict {
        SpVerdict::DecodableFiniteDelay => Ok(report.sets.len() * code.max_len()),
        _ => Err(Error::WrongVerdict),
    }
}

fn extended(prefix: &[Symbol], s: Symbol) -> Vec<Symbol> {
    let mut v = prefix.to_vec();
    v.push(s);
    v
}

/// For every symbol reachable from `initial`, a shortest valid path ending
/// in it (`None` if unreachable).
fn reachable_paths(graph: &TransitionGraph, initial: &[bool]) -> Vec<Option<Vec<Symbol>>> {
    let n = graph.len();
    let mut parent: Vec<Option<Option<Symbol>>> = vec![None; n];
    let mut queue = VecDeque::new();
    for s in (0..n).filter(|&s| initial[s]) {
        parent[s] = Some(None);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for v in graph.successors(u) {
            if parent[v].is_none() {
                parent[v] = Some(Some(u));
                queue.push_back(v);
            }
        }
    }
    (0..n)
        .map(|s| {
            parent[s]?;
            let mut path = vec![s];
            let mut cur = s;
            while let Some(Some(p)) = parent[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            Some(path)
        })
        .collect()
}
