//! The generalized Kraft condition for constrained sources.
//!
//! For a transition graph and codeword lengths `l`, the substitution matrix
//! has `Q[i][j] = 2^{-l_i}` wherever `i -> j` is allowed and zero elsewhere.
//! A uniquely decodable code must have `ρ(Q) ≤ 1`. On a complete graph this
//! reduces to the classic Kraft sum.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Rational};
use crate::model::{LengthVector, TransitionGraph};

/// Largest dimension for which all `2^n` principal minors are enumerated.
pub const EXACT_MINOR_LIMIT: usize = 12;
/// Iteration cap for [`spectral_radius`].
pub const POWER_ITERATION_CAP: usize = 100_000;
/// Tolerance used by [`kraft_check`] when it has to fall back to floats.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Exact dyadic substitution matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    entries: Matrix,
    weights: Vec<Rational>,
}

impl QMatrix {
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Per-row nonzero value `L_i = 2^{-l_i}`.
    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Zero pattern of the matrix as a graph.
    pub fn pattern(&self) -> Result<TransitionGraph> {
        TransitionGraph::new(
            self.entries.iter().map(|r| r.iter().map(|x| !x.is_zero()).collect()).collect(),
        )
    }

    fn as_f64(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|r| r.iter().map(linalg::to_f64).collect()).collect()
    }
}

/// Where `ρ(Q)` sits relative to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KraftClass {
    StrictlyBelowOne,
    ExactlyOne,
    AboveOne,
}

impl KraftClass {
    /// `ρ(Q) ≤ 1`: the necessary condition holds.
    pub fn is_admissible(self) -> bool {
        self != KraftClass::AboveOne
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KraftVerdict {
    pub radius_estimate: f64,
    pub classification: KraftClass,
    /// True when the classification was decided with rational arithmetic.
    pub exact: bool,
}

pub fn build_q(graph: &TransitionGraph, lengths: &LengthVector) -> Result<QMatrix> {
    if graph.len() != lengths.len() {
        return Err(Error::DimensionMismatch { expected: graph.len(), actual: lengths.len() });
    }
    let weights: Vec<Rational> = lengths.as_slice().iter().map(|&l| linalg::dyadic(l)).collect();
    let entries = graph
        .rows()
        .iter()
        .zip(&weights)
        .map(|(row, w)| {
            row.iter().map(|&b| if b { w.clone() } else { Rational::zero() }).collect()
        })
        .collect();
    Ok(QMatrix { entries, weights })
}

/// `ρ(Q)` by power iteration from the all-ones vector.
///
/// Periodic or reducible patterns are handled by iterating on `Q + I/2`
/// and subtracting the shift afterwards; the Perron root is the unique
/// eigenvalue of maximal modulus of the shifted matrix. Convergence is
/// declared when the Collatz–Wielandt bracket `[min (Qx)_i/x_i, max (Qx)_i/x_i]`,
/// which always contains `ρ`, is narrower than `tol`.
pub fn spectral_radius(q: &QMatrix, tol: f64) -> Result<f64> {
    let n = q.len();
    let mut m = q.as_f64();
    let needs_shift = q.pattern().ok().and_then(|g| g.period()) != Some(1);
    let shift = if needs_shift { 0.5 } else { 0.0 };
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += shift;
    }
    let mut x = vec![1.0f64; n];
    for _ in 0..POWER_ITERATION_CAP {
        let y: Vec<f64> = m.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let ratio = yi / xi;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if !lo.is_finite() || hi.is_nan() {
            break;
        }
        if hi - lo < tol {
            return Ok(0.5 * (hi + lo) - shift);
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            // Nilpotent; only reachable without a shift, which needs a positive cycle.
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / norm).collect();
        if x.contains(&0.0) {
            break;
        }
    }
    Err(Error::NonConvergence { iterations: POWER_ITERATION_CAP })
}

/// Decides where `ρ(Q)` lies relative to one.
///
/// `I - Q` is a Z-matrix, so `ρ(Q) < 1` iff its leading principal minors
/// are all positive, and `ρ(Q) ≤ 1` iff all of its principal minors are
/// nonnegative. The first test is always run exactly; the second is run
/// exactly up to [`EXACT_MINOR_LIMIT`] symbols and otherwise replaced by a
/// floating-point estimate.
pub fn kraft_check(graph: &TransitionGraph, lengths: &LengthVector) -> Result<KraftVerdict> {
    if !graph.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let q = build_q(graph, lengths)?;
    let n = q.len();
    let radius = spectral_radius(&q, FLOAT_TOLERANCE);
    let m = i_minus(&q);

    let leading_positive = (1..=n).all(|k| {
        let idx: Vec<usize> = (0..k).collect();
        linalg::principal_minor(&m, &idx).is_positive()
    });
    if leading_positive {
        return Ok(KraftVerdict {
            radius_estimate: radius.unwrap_or(f64::NAN),
            classification: KraftClass::StrictlyBelowOne,
            exact: true,
        });
    }

    if n <= EXACT_MINOR_LIMIT {
        let all_nonneg = (1u32..(1u32 << n)).all(|mask| {
            let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            !linalg::principal_minor(&m, &idx).is_negative()
        });
        let classification =
            if all_nonneg { KraftClass::ExactlyOne } else { KraftClass::AboveOne };
        return Ok(KraftVerdict {
            radius_estimate: radius.unwrap_or(f64::NAN),
            classification,
            exact: true,
        });
    }

    // Not strictly below one, so ρ ≥ 1; floats separate the two remaining cases.
    let rho = radius?;
    let classification = if rho <= 1.0 + FLOAT_TOLERANCE {
        KraftClass::ExactlyOne
    } else {
        KraftClass::AboveOne
    };
    Ok(KraftVerdict { radius_estimate: rho, classification, exact: false })
}

fn i_minus(q: &QMatrix) -> Matrix {
    let mut m = linalg::identity(q.len());
    for (mi, qi) in m.iter_mut().zip(q.entries()) {
        for (a, b) in mi.iter_mut().zip(qi) {
            *a -= b;
        }
    }
    m
}

/// `V_k = Q^{k-1} Lᵀ`; entry `i` is the weight sum over valid `k`-sequences
/// starting with symbol `i`.
pub fn v_vector(graph: &TransitionGraph, lengths: &LengthVector, k: usize) -> Result<Vec<Rational>> {
    assert!(k >= 1, "k must be positive");
    let q = build_q(graph, lengths)?;
    let mut v = q.weights().to_vec();
    for _ in 1..k {
        v = linalg::mat_vec(q.entries(), &v);
    }
    Ok(v)
}

/// `1 · Q^{k-1} · Lᵀ`, exact.
pub fn kraft_lhs(graph: &TransitionGraph, lengths: &LengthVector, k: usize) -> Result<Rational> {
    Ok(linalg::sum(&v_vector(graph, lengths, k)?))
}

/// The right-hand bound `k (l_max - l_min + 1)` that `kraft_lhs` may not
/// exceed for a uniquely decodable code.
pub fn kraft_rhs(lengths: &LengthVector, k: usize) -> Rational {
    linalg::rat((k as i64) * i64::from(lengths.max() - lengths.min() + 1), 1)
}

/// No more than `2^i` codewords of any length `i`.
pub fn counting_precheck(lengths: &LengthVector) -> bool {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &l in lengths.as_slice() {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_iter().all(|(l, c)| l >= 64 || c <= 1u64 << l)
}

/// Classic Kraft sum `Σ 2^{-l_i}`.
pub fn kraft_sum(lengths: &LengthVector) -> Rational {
    lengths.as_slice().iter().fold(Rational::zero(), |acc, &l| acc + linalg::dyadic(l))
}

/// Classification of the classic Kraft sum against one.
pub fn classify_sum(sum: &Rational) -> KraftClass {
    let one = Rational::one();
    match sum.cmp(&one) {
        std::cmp::Ordering::Less => KraftClass::StrictlyBelowOne,
        std::cmp::Ordering::Equal => KraftClass::ExactlyOne,
        std::cmp::Ordering::Greater => KraftClass::AboveOne,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::model::enumerate_valid_sequences;
    use proptest::prelude::*;

    fn lv(v: &[u32]) -> LengthVector {
        LengthVector::new(v.to_vec()).unwrap()
    }

    fn fig1_graph() -> TransitionGraph {
        TransitionGraph::new(vec![
            vec![true, false, true],
            vec![true, true, true],
            vec![true, true, true],
        ])
        .unwrap()
    }

    fn two_successor_graph() -> TransitionGraph {
        TransitionGraph::from_edges(3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]).unwrap()
    }

    /// Characteristic polynomial coefficients `det(λI - M)` by the
    /// Faddeev–LeVerrier recursion, highest degree first.
    fn char_poly(m: &Matrix) -> Vec<Rational> {
        let n = m.len();
        let mul = |a: &Matrix, b: &Matrix| -> Matrix {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).fold(Rational::zero(), |acc, t| acc + &a[i][t] * &b[t][j]))
                        .collect()
                })
                .collect()
        };
        let mut coeffs = vec![Rational::one()];
        let mut mk: Matrix = vec![vec![Rational::zero(); n]; n];
        let mut c = Rational::one();
        for k in 1..=n {
            mk = mul(m, &mk);
            for (i, row) in mk.iter_mut().enumerate() {
                row[i] += &c;
            }
            let am = mul(m, &mk);
            let trace = (0..n).fold(Rational::zero(), |acc, i| acc + &am[i][i]);
            c = -trace / rat(k as i64, 1);
            coeffs.push(c.clone());
        }
        coeffs
    }

    #[test]
    fn build_q_examples() {
        let q = build_q(&fig1_graph(), &lv(&[1, 1, 2])).unwrap();
        let h = rat(1, 2);
        let f = rat(1, 4);
        let z = rat(0, 1);
        assert_eq!(
            q.entries(),
            &vec![
                vec![h.clone(), z, h.clone()],
                vec![h.clone(), h.clone(), h],
                vec![f.clone(), f.clone(), f],
            ]
        );
        let full = build_q(&TransitionGraph::complete(3).unwrap(), &lv(&[1, 2, 3])).unwrap();
        for row in full.entries() {
            assert_eq!(row, &full.entries()[0].iter().map(|_| row[0].clone()).collect::<Vec<_>>());
        }
        assert_eq!(full.entries()[2][0], rat(1, 8));
        let one = build_q(&TransitionGraph::complete(1).unwrap(), &lv(&[1])).unwrap();
        assert_eq!(one.entries(), &vec![vec![rat(1, 2)]]);
        assert!(build_q(&fig1_graph(), &lv(&[1, 1])).is_err());
    }

    #[test]
    fn fig1_characteristic_polynomial_has_root_one() {
        let q = build_q(&fig1_graph(), &lv(&[1, 1, 2])).unwrap();
        // λ³ - (5/4)λ² + (1/4)λ = λ(λ - 1)(λ - 1/4)
        assert_eq!(
            char_poly(q.entries()),
            vec![rat(1, 1), rat(-5, 4), rat(1, 4), rat(0, 1)]
        );
    }

    #[test]
    fn spectral_radius_examples() {
        let full = build_q(&TransitionGraph::complete(3).unwrap(), &lv(&[1, 2, 2])).unwrap();
        assert!((spectral_radius(&full, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let single = build_q(&TransitionGraph::complete(1).unwrap(), &lv(&[1])).unwrap();
        assert!((spectral_radius(&single, 1e-12).unwrap() - 0.5).abs() < 1e-10);
        let q = build_q(&fig1_graph(), &lv(&[1, 1, 2])).unwrap();
        assert!((spectral_radius(&q, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_periodic_graph() {
        // A 2-cycle with lengths 1 and 3: ρ = sqrt(1/2 · 1/8) = 1/4.
        let g = TransitionGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let q = build_q(&g, &lv(&[1, 3])).unwrap();
        assert!((spectral_radius(&q, 1e-12).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn kraft_check_examples() {
        let v = kraft_check(&fig1_graph(), &lv(&[1, 1, 2])).unwrap();
        assert_eq!(v.classification, KraftClass::ExactlyOne);
        assert!(v.exact);
        let v = kraft_check(&TransitionGraph::complete(3).unwrap(), &lv(&[1, 1, 1])).unwrap();
        assert_eq!(v.classification, KraftClass::AboveOne);
        let v = kraft_check(&two_successor_graph(), &lv(&[1, 1, 1])).unwrap();
        assert_eq!(v.classification, KraftClass::ExactlyOne);
        let v = kraft_check(&TransitionGraph::complete(2).unwrap(), &lv(&[1, 2])).unwrap();
        assert_eq!(v.classification, KraftClass::StrictlyBelowOne);
        assert!((v.radius_estimate - 0.75).abs() < 1e-9);
    }

    #[test]
    fn kraft_check_rejects_reducible() {
        let g = TransitionGraph::from_edges(2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(kraft_check(&g, &lv(&[1, 1])), Err(Error::NotIrreducible));
    }

    #[test]
    fn kraft_check_large_graph_uses_float_path() {
        let n = EXACT_MINOR_LIMIT + 2;
        // Cycle 0 -> 1 -> ... -> n-1 -> 0 plus self-loops: every row has two
        // successors, so lengths of one bit put ρ exactly at one.
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((0..n).map(|i| (i, i)));
        let g = TransitionGraph::from_edges(n, &edges).unwrap();
        let v = kraft_check(&g, &LengthVector::new(vec![1; n]).unwrap()).unwrap();
        assert_eq!(v.classification, KraftClass::ExactlyOne);
        assert!(!v.exact);
        let v = kraft_check(&g, &LengthVector::new(vec![2; n]).unwrap()).unwrap();
        assert_eq!(v.classification, KraftClass::StrictlyBelowOne);
        assert!(v.exact);
        let mut l = vec![1; n];
        l[0] = 1;
        let g2 = TransitionGraph::complete(n).unwrap();
        let v = kraft_check(&g2, &LengthVector::new(l).unwrap()).unwrap();
        assert_eq!(v.classification, KraftClass::AboveOne);
        assert!(!v.exact);
    }

    #[test]
    fn kraft_lhs_examples() {
        let g = fig1_graph();
        let l = lv(&[1, 1, 2]);
        assert_eq!(kraft_lhs(&g, &l, 1).unwrap(), rat(5, 4));
        assert_eq!(kraft_lhs(&g, &l, 2).unwrap(), rat(21, 16));
        let full = TransitionGraph::complete(3).unwrap();
        let l = lv(&[1, 2, 3]);
        for k in 1..6 {
            let mut expected = rat(1, 1);
            for _ in 0..k {
                expected *= rat(7, 8);
            }
            assert_eq!(kraft_lhs(&full, &l, k).unwrap(), expected);
        }
    }

    #[test]
    fn kraft_lhs_two_sequences_by_hand() {
        // The 8 valid pairs and their total lengths: AA, BA, BB -> 2; AC, BC,
        // CA, CB -> 3; CC -> 4.
        let expected = rat(3, 4) + rat(4, 8) + rat(1, 16);
        assert_eq!(expected, rat(21, 16));
    }

    #[test]
    fn counting_precheck_examples() {
        assert!(!counting_precheck(&lv(&[1, 1, 1])));
        assert!(counting_precheck(&lv(&[1, 1, 2])));
        assert!(counting_precheck(&lv(&[3])));
        assert!(!counting_precheck(&lv(&[2, 2, 2, 2, 2])));
    }

    fn arb_irreducible() -> impl Strategy<Value = (TransitionGraph, LengthVector)> {
        (1usize..=5)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n),
                    proptest::collection::vec(1u32..=4, n),
                )
            })
            .prop_filter_map("irreducible", |(rows, lens)| {
                let g = TransitionGraph::new(rows).ok()?;
                g.is_irreducible().then(|| (g, LengthVector::new(lens).unwrap()))
            })
    }

    proptest! {
        #[test]
        fn v_vector_identity((g, l) in arb_irreducible(), k in 1usize..5) {
            let seqs = enumerate_valid_sequences(&g, k, None).unwrap();
            let v = v_vector(&g, &l, k).unwrap();
            for (i, vi) in v.iter().enumerate() {
                let brute = seqs.iter().filter(|s| s[0] == i).fold(Rational::zero(), |acc, s| {
                    acc + linalg::dyadic(s.iter().map(|&x| l.get(x)).sum())
                });
                prop_assert_eq!(vi, &brute);
            }
        }

        #[test]
        fn complete_graph_matches_classic_sum(n in 1usize..=6, lens in proptest::collection::vec(1u32..=4, 6)) {
            let l = LengthVector::new(lens[..n].to_vec()).unwrap();
            let g = TransitionGraph::complete(n).unwrap();
            let v = kraft_check(&g, &l).unwrap();
            prop_assert_eq!(v.classification, classify_sum(&kraft_sum(&l)));
            prop_assert!((v.radius_estimate - linalg::to_f64(&kraft_sum(&l))).abs() < 1e-8);
        }

        #[test]
        fn shortening_a_word_raises_radius((g, l) in arb_irreducible(), which in 0usize..5) {
            let i = which % l.len();
            prop_assume!(l.get(i) > 1);
            let mut shorter = l.as_slice().to_vec();
            shorter[i] -= 1;
            let before = spectral_radius(&build_q(&g, &l).unwrap(), 1e-12).unwrap();
            let after = spectral_radius(&build_q(&g, &LengthVector::new(shorter).unwrap()).unwrap(), 1e-12).unwrap();
            prop_assert!(after > before + 1e-9);
        }

        #[test]
        fn exact_and_float_paths_agree((g, l) in arb_irreducible()) {
            let v = kraft_check(&g, &l).unwrap();
            let rho = spectral_radius(&build_q(&g, &l).unwrap(), 1e-12).unwrap();
            prop_assert!(v.exact);
            match v.classification {
                KraftClass::StrictlyBelowOne => prop_assert!(rho < 1.0 + 1e-6),
                KraftClass::ExactlyOne => prop_assert!((rho - 1.0).abs() < 1e-6),
                KraftClass::AboveOne => prop_assert!(rho > 1.0 - 1e-6),
            }
        }
    }
}
