//! Report types shared by text and `--json` output.
//!
//! The JSON schema is exactly the serde form of these structs (see
//! `docs/json-schema.md`). Rationals are strings such as `"4/3"`, entropies
//! are JSON numbers, and symbols appear by name.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeReport {
    pub description: Option<String>,
    pub symbols: Vec<String>,
    pub irreducible: bool,
    /// Period of the graph when irreducible.
    pub period: Option<usize>,
    /// Omitted (null) without probabilities or when the graph is reducible.
    pub stationary: Option<Vec<String>>,
    pub entropy_rate: Option<f64>,
    /// `μ·lᵀ`, bits per symbol in steady state.
    pub mean_length: Option<String>,
    pub kraft: Option<KraftReport>,
    pub sp_test: Option<SpTestReport>,
    pub sweep: Vec<SweepRow>,
    /// Human-readable reasons for omitted fields.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub k: usize,
    pub block_entropy: f64,
    pub expected_length: String,
    pub expected_length_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KraftReport {
    pub symbols: Vec<String>,
    pub lengths: Vec<u32>,
    pub q: Vec<Vec<String>>,
    /// `StrictlyBelowOne`, `ExactlyOne` or `AboveOne`; null when the graph
    /// is reducible.
    pub classification: Option<String>,
    pub radius_estimate: Option<f64>,
    pub exact: Option<bool>,
    pub admissible: Option<bool>,
    /// Classic `Σ 2^{-l_i}`.
    pub kraft_sum: String,
    /// At most `2^i` codewords of length `i`.
    pub counting_precheck: bool,
    /// `1·Q^{k-1}·Lᵀ` against `k(l_max − l_min + 1)`; only from `kraft`.
    pub power_sums: Vec<PowerSumRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSumRow {
    pub k: usize,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpTestReport {
    pub symbols: Vec<String>,
    pub codewords: Vec<String>,
    /// `DecodableFiniteDelay`, `DecodableInfiniteDelay` or `NotDecodable`.
    pub verdict: String,
    /// Suffix sets `S_1, S_2, …`, each element written `left:bits:right`.
    pub sets: Vec<Vec<String>>,
    pub repeat_of: Option<usize>,
    pub delay_bound_bits: Option<usize>,
    pub witness: Option<WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessReport {
    pub first: Vec<String>,
    pub second: Vec<String>,
    pub bits: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub budget: usize,
    pub witness: Option<WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchReport {
    pub max_len: u32,
    pub length_vectors_total: usize,
    pub pruned_by_counting: usize,
    pub pruned_by_kraft: usize,
    pub candidates_tested: usize,
    pub entries: Vec<SearchRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRow {
    pub codewords: Vec<String>,
    /// `μ·lᵀ`; null when the file has no probabilities.
    pub mean_length: Option<String>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HuffmanReport {
    pub symbols: Vec<String>,
    /// Code for the first symbol; null entries have zero probability.
    pub initial: Vec<Option<String>>,
    /// One code per previous symbol.
    pub conditional: Vec<Vec<Option<String>>>,
    pub sweep: Vec<HuffmanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HuffmanRow {
    pub k: usize,
    pub block_entropy: f64,
    pub huffman_length: String,
    /// Expected length of the file's own codebook, when present.
    pub code_length: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeReport {
    pub bits: String,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeReport {
    pub symbols: Vec<String>,
    /// Present with `--stream`.
    pub emissions: Option<Vec<EmissionRow>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionRow {
    pub symbol: String,
    pub codeword_end: usize,
    pub emitted_at: usize,
    pub lag: usize,
}
