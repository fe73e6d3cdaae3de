//! Constrained Markov sources with exact rational probabilities.
//!
//! Symbols are 0-based indices. Names such as `A`, `B`, `C` belong to the
//! I/O layer only.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Rational};

pub type Symbol = usize;

/// Upper limit on the number of sequences [`enumerate_valid_sequences`]
/// will materialize.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Which symbol may follow which.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionGraph {
    allowed: Vec<Vec<bool>>,
}

impl TransitionGraph {
    /// Validates that the matrix is square, nonempty, and that every symbol
    /// has at least one successor.
    pub fn new(allowed: Vec<Vec<bool>>) -> Result<Self> {
        let n = allowed.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one symbol".into()));
        }
        for (i, row) in allowed.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if !row.iter().any(|&b| b) {
                return Err(Error::InvalidGraph(format!("symbol {i} has no allowed successor")));
            }
        }
        Ok(Self { allowed })
    }

    /// Every transition allowed.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(vec![vec![true; n]; n])
    }

    /// Builds from an explicit edge list over `n` symbols.
    pub fn from_edges(n: usize, edges: &[(Symbol, Symbol)]) -> Result<Self> {
        let mut allowed = vec![vec![false; n]; n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) out of range")));
            }
            allowed[i][j] = true;
        }
        Self::new(allowed)
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        self.allowed[from][to]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.allowed
    }

    pub fn successors(&self, from: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        self.allowed[from].iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j)
    }

    pub fn is_complete(&self) -> bool {
        self.allowed.iter().all(|r| r.iter().all(|&b| b))
    }

    /// True when `seq` uses only allowed transitions.
    pub fn is_valid_sequence(&self, seq: &[Symbol]) -> bool {
        seq.iter().all(|&s| s < self.len()) && seq.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Returns the first forbidden position of `seq`, if any.
    pub fn check_sequence(&self, seq: &[Symbol]) -> Result<()> {
        for (i, &s) in seq.iter().enumerate() {
            if s >= self.len() {
                return Err(Error::InvalidSequence {
                    position: i,
                    reason: format!("symbol index {s} out of range"),
                });
            }
            if i > 0 && !self.allows(seq[i - 1], s) {
                return Err(Error::InvalidSequence {
                    position: i,
                    reason: format!("transition {} -> {s} is forbidden", seq[i - 1]),
                });
            }
        }
        Ok(())
    }

    fn reachable_from_zero(&self, reversed: bool) -> Vec<bool> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let edge = if reversed { self.allowed[v][u] } else { self.allowed[u][v] };
                if edge && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the directed graph.
    pub fn is_irreducible(&self) -> bool {
        self.reachable_from_zero(false).into_iter().all(|b| b)
            && self.reachable_from_zero(true).into_iter().all(|b| b)
    }

    /// Period of an irreducible graph (gcd of its cycle lengths). `None`
    /// for reducible graphs.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        let n = self.len();
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for v in self.successors(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..n {
            for v in self.successors(u) {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
        Some(g)
    }

    /// Number of valid length-`k` sequences, `1·A^{k-1}·1ᵀ`, starting from
    /// the symbols flagged in `start`.
    pub fn count_sequences(&self, k: usize, start: &[bool]) -> BigUint {
        if k == 0 {
            return BigUint::zero();
        }
        let mut counts: Vec<BigUint> =
            start.iter().map(|&b| if b { BigUint::one() } else { BigUint::zero() }).collect();
        for _ in 1..k {
            let mut next = vec![BigUint::zero(); self.len()];
            for (i, c) in counts.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in self.successors(i) {
                    next[j] += c;
                }
            }
            counts = next;
        }
        counts.into_iter().sum()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// A probability vector with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution(Vec<Rational>);

impl Distribution {
    /// Entries must be nonnegative and sum to exactly one.
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSource("empty distribution".into()));
        }
        if let Some(i) = probs.iter().position(|p| p.is_negative()) {
            return Err(Error::InvalidSource(format!("negative probability at index {i}")));
        }
        let total = linalg::sum(&probs);
        if !total.is_one() {
            return Err(Error::InvalidSource(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![linalg::rat(1, n as i64); n])
    }

    /// All mass on one symbol.
    pub fn point(n: usize, at: Symbol) -> Self {
        let mut v = vec![Rational::zero(); n];
        v[at] = Rational::one();
        Self(v)
    }

    pub fn probs(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<bool> {
        self.0.iter().map(|p| !p.is_zero()).collect()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.0)
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

/// `-Σ p log₂ p` over the nonzero entries.
pub fn entropy_bits(probs: &[Rational]) -> f64 {
    probs
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let x = linalg::to_f64(p);
            -x * x.log2()
        })
        .sum::<f64>()
        // A certain outcome sums to -0.0; adding +0.0 normalizes it.
        + 0.0
}

/// Codeword lengths in bits, all at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct LengthVector(Vec<u32>);

impl LengthVector {
    pub fn new(lengths: Vec<u32>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidLengths("length vector is empty".into()));
        }
        if let Some(i) = lengths.iter().position(|&l| l == 0) {
            return Err(Error::InvalidLengths(format!("length at index {i} is zero")));
        }
        Ok(Self(lengths))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> u32 {
        *self.0.iter().min().expect("nonempty")
    }

    pub fn max(&self) -> u32 {
        *self.0.iter().max().expect("nonempty")
    }

    pub fn get(&self, i: Symbol) -> u32 {
        self.0[i]
    }

    pub fn as_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(|&l| linalg::rat(i64::from(l), 1)).collect()
    }
}

impl TryFrom<Vec<u32>> for LengthVector {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LengthVector> for Vec<u32> {
    fn from(l: LengthVector) -> Vec<u32> {
        l.0
    }
}

/// Transition graph, exact transition matrix and initial distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovSource {
    graph: TransitionGraph,
    transitions: Vec<Vec<Rational>>,
    initial: Distribution,
}

impl MarkovSource {
    /// The graph is derived from the zero pattern of `transitions`.
    pub fn new(transitions: Vec<Vec<Rational>>, initial: Vec<Rational>) -> Result<Self> {
        let n = transitions.len();
        if initial.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: initial.len() });
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSource(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|p| p.is_negative()) {
                return Err(Error::InvalidSource(format!("negative entry at ({i}, {j})")));
            }
            let total = linalg::sum(row);
            if !total.is_one() {
                return Err(Error::InvalidSource(format!("row {i} sums to {total}, not 1")));
            }
        }
        let allowed = transitions
            .iter()
            .map(|row| row.iter().map(|p| !p.is_zero()).collect())
            .collect();
        let graph = TransitionGraph::new(allowed)?;
        let initial = Distribution::new(initial)?;
        Ok(Self { graph, transitions, initial })
    }

    /// Same as [`MarkovSource::new`] with a uniform initial distribution.
    pub fn with_uniform_start(transitions: Vec<Vec<Rational>>) -> Result<Self> {
        let n = transitions.len();
        Self::new(transitions, Distribution::uniform(n.max(1)).into_inner())
    }

    /// Uniform transition probabilities over each row's allowed successors.
    pub fn uniform_on(graph: &TransitionGraph) -> Self {
        let transitions = graph
            .rows()
            .iter()
            .map(|row| {
                let d = row.iter().filter(|&&b| b).count() as i64;
                row.iter()
                    .map(|&b| if b { linalg::rat(1, d) } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self {
            graph: graph.clone(),
            transitions,
            initial: Distribution::uniform(graph.len()),
        }
    }

    pub fn with_initial(&self, initial: Vec<Rational>) -> Result<Self> {
        Self::new(self.transitions.clone(), initial)
    }

    pub fn graph(&self) -> &TransitionGraph {
        &self.graph
    }

    pub fn transitions(&self) -> &[Vec<Rational>] {
        &self.transitions
    }

    pub fn initial(&self) -> &Distribution {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// Entropy in bits of each row of the transition matrix.
    pub fn row_entropies(&self) -> Vec<f64> {
        self.transitions.iter().map(|r| entropy_bits(r)).collect()
    }
}

/// `S_k = S_1 · P^{k-1}`.
pub fn step_distribution(src: &MarkovSource, k: usize) -> Distribution {
    assert!(k >= 1, "step index is 1-based");
    let mut s = src.initial.probs().to_vec();
    for _ in 1..k {
        s = linalg::vec_mat(&s, &src.transitions);
    }
    Distribution(s)
}

/// Distributions `S_1, …, S_k`.
fn step_distributions(src: &MarkovSource, k: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::with_capacity(k);
    let mut s = src.initial.probs().to_vec();
    for i in 0..k {
        if i > 0 {
            s = linalg::vec_mat(&s, &src.transitions);
        }
        out.push(s.clone());
    }
    out
}

/// The unique `μ` with `μP = μ` and `Σμ = 1`.
pub fn stationary_distribution(src: &MarkovSource) -> Result<Distribution> {
    if !src.graph.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = src.len();
    // (Pᵀ - I) μᵀ = 0 with the last equation replaced by Σμ = 1.
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut x = src.transitions[j][i].clone();
                    if i == j {
                        x -= Rational::one();
                    }
                    x
                })
                .collect()
        })
        .collect();
    a[n - 1] = vec![Rational::one(); n];
    let mut b = vec![Rational::zero(); n];
    b[n - 1] = Rational::one();
    let mu = linalg::solve(&a, &b).ok_or(Error::NotIrreducible)?;
    Distribution::new(mu)
}

/// `H(X_1, …, X_k)` by the Markov chain rule, in bits.
pub fn block_entropy(src: &MarkovSource, k: usize) -> f64 {
    assert!(k >= 1, "block length must be positive");
    let rows = src.row_entropies();
    let mut h = src.initial.entropy();
    if k > 1 {
        for s in step_distributions(src, k - 1) {
            h += s.iter().zip(&rows).map(|(p, hr)| linalg::to_f64(p) * hr).sum::<f64>();
        }
    }
    h
}

/// `Σ_j μ_j H(P_j)` in bits per symbol.
pub fn entropy_rate(src: &MarkovSource) -> Result<f64> {
    let mu = stationary_distribution(src)?;
    Ok(mu
        .probs()
        .iter()
        .zip(src.row_entropies())
        .map(|(p, h)| linalg::to_f64(p) * h)
        .sum())
}

/// `E[l(X_1) + … + l(X_k)] = Σ_i S_i · lᵀ`, exact.
pub fn expected_code_length(src: &MarkovSource, lengths: &LengthVector, k: usize) -> Result<Rational> {
    assert!(k >= 1, "block length must be positive");
    if lengths.len() != src.len() {
        return Err(Error::DimensionMismatch { expected: src.len(), actual: lengths.len() });
    }
    let l = lengths.as_rationals();
    Ok(step_distributions(src, k)
        .iter()
        .fold(Rational::zero(), |acc, s| acc + linalg::dot(s, &l)))
}

/// All graph-valid length-`k` sequences in lexicographic order. `initial`
/// restricts the first symbol; `None` allows every symbol.
pub fn enumerate_valid_sequences(
    graph: &TransitionGraph,
    k: usize,
    initial: Option<&[Symbol]>,
) -> Result<Vec<Vec<Symbol>>> {
    assert!(k >= 1, "sequence length must be positive");
    let n = graph.len();
    let mut start = vec![initial.is_none(); n];
    if let Some(init) = initial {
        for &s in init {
            if s >= n {
                return Err(Error::InvalidSequence {
                    position: 0,
                    reason: format!("initial symbol {s} out of range"),
                });
            }
            start[s] = true;
        }
    }
    let count = graph.count_sequences(k, &start);
    if count > BigUint::from(ENUMERATION_LIMIT) {
        return Err(Error::TooLarge(format!(
            "{count} sequences of length {k} exceed the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut stack = Vec::with_capacity(k);
    for s in (0..n).filter(|&s| start[s]) {
        stack.push(s);
        extend_sequences(graph, k, &mut stack, &mut out);
        stack.pop();
    }
    Ok(out)
}

fn extend_sequences(
    graph: &TransitionGraph,
    k: usize,
    stack: &mut Vec<Symbol>,
    out: &mut Vec<Vec<Symbol>>,
) {
    if stack.len() == k {
        out.push(stack.clone());
        return;
    }
    let last = *stack.last().expect("nonempty prefix");
    for next in graph.successors(last) {
        stack.push(next);
        extend_sequences(graph, k, stack, out);
        stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use proptest::prelude::*;

    fn fig1() -> MarkovSource {
        MarkovSource::with_uniform_start(vec![
            vec![rat(1, 2), rat(0, 1), rat(1, 2)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
        ])
        .unwrap()
    }

    fn four_state() -> MarkovSource {
        let q = rat(1, 4);
        let h = rat(1, 2);
        let z = rat(0, 1);
        MarkovSource::with_uniform_start(vec![
            vec![h.clone(), z.clone(), h.clone(), z.clone()],
            vec![z.clone(), h.clone(), z, h],
            vec![q.clone(), q.clone(), q.clone(), q.clone()],
            vec![q.clone(), q.clone(), q.clone(), q],
        ])
        .unwrap()
    }

    fn cycle(n: usize) -> MarkovSource {
        let p = (0..n)
            .map(|i| (0..n).map(|j| if j == (i + 1) % n { rat(1, 1) } else { rat(0, 1) }).collect())
            .collect();
        MarkovSource::with_uniform_start(p).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(TransitionGraph::new(vec![]).is_err());
        assert!(TransitionGraph::new(vec![vec![true, false]]).is_err());
        assert!(TransitionGraph::new(vec![vec![false, true], vec![false, false]]).is_err());
        let g = TransitionGraph::from_edges(2, &[(0, 0), (1, 0)]).unwrap();
        assert!(!g.is_irreducible());
        assert_eq!(g.period(), None);
    }

    #[test]
    fn periods() {
        assert_eq!(cycle(3).graph().period(), Some(3));
        assert_eq!(fig1().graph().period(), Some(1));
        assert_eq!(TransitionGraph::complete(1).unwrap().period(), Some(1));
    }

    #[test]
    fn source_validation() {
        assert!(MarkovSource::new(vec![vec![rat(1, 2)]], vec![rat(1, 1)]).is_err());
        assert!(MarkovSource::new(vec![vec![rat(1, 1)]], vec![rat(1, 2)]).is_err());
        assert!(MarkovSource::new(vec![vec![rat(1, 1)]], vec![rat(1, 1), rat(0, 1)]).is_err());
        assert!(MarkovSource::new(
            vec![vec![rat(3, 2), rat(-1, 2)], vec![rat(1, 2), rat(1, 2)]],
            vec![rat(1, 2), rat(1, 2)]
        )
        .is_err());
    }

    #[test]
    fn step_distribution_examples() {
        let third = vec![rat(1, 3); 3];
        assert_eq!(step_distribution(&fig1(), 5).probs(), &third[..]);
        assert_eq!(step_distribution(&fig1(), 1), *fig1().initial());
        assert_eq!(step_distribution(&four_state(), 2).probs(), &vec![rat(1, 4); 4][..]);
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary_distribution(&fig1()).unwrap().probs(), &vec![rat(1, 3); 3][..]);
        assert_eq!(stationary_distribution(&cycle(1)).unwrap().probs(), &[rat(1, 1)]);
        let mu = stationary_distribution(&four_state()).unwrap();
        assert_eq!(mu.probs(), &vec![rat(1, 4); 4][..]);
        assert_eq!(linalg::vec_mat(mu.probs(), four_state().transitions()), mu.probs());
    }

    #[test]
    fn stationary_rejects_reducible() {
        let src = MarkovSource::with_uniform_start(vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        assert_eq!(stationary_distribution(&src), Err(Error::NotIrreducible));
        assert_eq!(entropy_rate(&src), Err(Error::NotIrreducible));
    }

    #[test]
    fn stationary_nonuniform() {
        // Two-state chain: μ = (b, a) / (a + b) for flip probabilities a, b.
        let src = MarkovSource::with_uniform_start(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 5), rat(4, 5)],
        ])
        .unwrap();
        let mu = stationary_distribution(&src).unwrap();
        assert_eq!(mu.probs(), &[rat(3, 8), rat(5, 8)]);
    }

    #[test]
    fn block_entropy_examples() {
        let h3 = block_entropy(&fig1(), 3);
        assert!((h3 - (3f64.log2() + 8.0 / 3.0)).abs() < 1e-9);
        assert!((h3 - 4.251629).abs() < 1e-6);
        let det = fig1().with_initial(vec![rat(0, 1), rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(block_entropy(&det, 1), 0.0);
        assert!((block_entropy(&four_state(), 4) - 6.5).abs() < 1e-9);
    }

    #[test]
    fn entropy_rate_examples() {
        assert!((entropy_rate(&fig1()).unwrap() - 4.0 / 3.0).abs() < 1e-9);
        assert_eq!(entropy_rate(&cycle(4)).unwrap(), 0.0);
        assert!((entropy_rate(&four_state()).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn expected_length_examples() {
        let l = LengthVector::new(vec![1, 1, 2]).unwrap();
        assert_eq!(expected_code_length(&fig1(), &l, 3).unwrap(), rat(4, 1));
        let det = fig1().with_initial(vec![rat(0, 1), rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(expected_code_length(&det, &l, 1).unwrap(), rat(1, 1));
        let l4 = LengthVector::new(vec![1, 1, 2, 2]).unwrap();
        assert_eq!(expected_code_length(&four_state(), &l4, 2).unwrap(), rat(3, 1));
        assert!(expected_code_length(&four_state(), &l, 2).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let g = fig1().graph().clone();
        let two = enumerate_valid_sequences(&g, 2, None).unwrap();
        let expected: Vec<Vec<Symbol>> =
            vec![vec![0, 0], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2], vec![2, 0], vec![2, 1], vec![2, 2]];
        assert_eq!(two, expected);
        assert_eq!(enumerate_valid_sequences(&g, 1, None).unwrap().len(), 3);
        let full = TransitionGraph::complete(3).unwrap();
        assert_eq!(enumerate_valid_sequences(&full, 3, None).unwrap().len(), 27);
        let from_a = enumerate_valid_sequences(&g, 2, Some(&[0])).unwrap();
        assert_eq!(from_a, vec![vec![0, 0], vec![0, 2]]);
    }

    #[test]
    fn enumeration_guard() {
        let full = TransitionGraph::complete(4).unwrap();
        assert!(matches!(enumerate_valid_sequences(&full, 13, None), Err(Error::TooLarge(_))));
    }

    #[test]
    fn length_vector_invariants() {
        assert!(LengthVector::new(vec![]).is_err());
        assert!(LengthVector::new(vec![1, 0]).is_err());
        let l = LengthVector::new(vec![3, 1, 2]).unwrap();
        assert_eq!((l.min(), l.max()), (1, 3));
    }

    fn arb_source() -> impl Strategy<Value = MarkovSource> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(proptest::collection::vec(0u32..4, n), n),
                    proptest::collection::vec(0u32..4, n),
                )
            })
            .prop_filter_map("rows need mass", |(n, weights, init)| {
                let rows: Option<Vec<Vec<Rational>>> = weights
                    .iter()
                    .map(|r| {
                        let t: u32 = r.iter().sum();
                        (t > 0).then(|| r.iter().map(|&w| rat(w.into(), t.into())).collect())
                    })
                    .collect();
                let t: u32 = init.iter().sum();
                if t == 0 {
                    return None;
                }
                let init = init.iter().map(|&w| rat(w.into(), t.into())).collect();
                let _ = n;
                MarkovSource::new(rows?, init).ok()
            })
    }

    proptest! {
        #[test]
        fn step_distribution_sums_to_one(src in arb_source(), k in 1usize..8) {
            prop_assert!(linalg::sum(step_distribution(&src, k).probs()).is_one());
        }

        #[test]
        fn chain_rule_increment(src in arb_source(), k in 1usize..7) {
            let inc = block_entropy(&src, k + 1) - block_entropy(&src, k);
            let sk = step_distribution(&src, k);
            let expected: f64 = sk.probs().iter().zip(src.row_entropies())
                .map(|(p, h)| linalg::to_f64(p) * h).sum();
            prop_assert!((inc - expected).abs() < 1e-9);
        }

        #[test]
        fn block_entropy_at_most_uniform(src in arb_source(), k in 1usize..8) {
            let bound = k as f64 * (src.len() as f64).log2();
            prop_assert!(block_entropy(&src, k) <= bound + 1e-9);
        }

        #[test]
        fn enumeration_count_matches_adjacency_power(src in arb_source(), k in 1usize..6) {
            let g = src.graph();
            let seqs = enumerate_valid_sequences(g, k, None).unwrap();
            prop_assert_eq!(BigUint::from(seqs.len()), g.count_sequences(k, &vec![true; g.len()]));
            prop_assert!(seqs.iter().all(|s| g.is_valid_sequence(s)));
        }

        #[test]
        fn stationary_is_fixed_point(src in arb_source(), lens in proptest::collection::vec(1u32..4, 4), k in 1usize..6) {
            prop_assume!(src.graph().is_irreducible());
            let mu = stationary_distribution(&src).unwrap();
            prop_assert_eq!(linalg::vec_mat(mu.probs(), src.transitions()), mu.probs().to_vec());
            let stat = src.with_initial(mu.probs().to_vec()).unwrap();
            let l = LengthVector::new(lens[..src.len()].to_vec()).unwrap();
            let per_symbol = linalg::dot(mu.probs(), &l.as_rationals());
            prop_assert_eq!(
                expected_code_length(&stat, &l, k).unwrap(),
                per_symbol * rat(k as i64, 1)
            );
        }

        #[test]
        fn aperiodic_sources_converge(src in arb_source()) {
            prop_assume!(src.graph().period() == Some(1));
            let mu = stationary_distribution(&src).unwrap();
            let p: Vec<Vec<f64>> = src.transitions().iter()
                .map(|r| r.iter().map(linalg::to_f64).collect()).collect();
            let mut s: Vec<f64> = src.initial().probs().iter().map(linalg::to_f64).collect();
            for _ in 0..5000 {
                s = (0..s.len()).map(|j| (0..s.len()).map(|i| s[i] * p[i][j]).sum()).collect();
            }
            for (a, b) in s.iter().zip(mu.probs()) {
                prop_assert!((a - linalg::to_f64(b)).abs() < 1e-6);
            }
        }
    }
}
