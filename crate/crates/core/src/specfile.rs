//! JSON description files for sources and codes.
//!
//! ```json
//! {
//!   "description": "optional free text",
//!   "symbols": ["A", "B", "C"],
//!   "transitions": [["1/2", "0", "1/2"], ["1/4", "1/2", "1/4"], ["1/4", "1/2", "1/4"]],
//!   "initial": ["1/3", "1/3", "1/3"],
//!   "codewords": ["0", "1", "01"]
//! }
//! ```
//!
//! Exactly one of `transitions` (exact rationals written as strings) and
//! `adjacency` (booleans) must be present. `initial` defaults to uniform and
//! is only meaningful with `transitions`. `codewords` and `lengths` are
//! optional; when both are given they must agree. JSON numbers are refused
//! for probabilities so that no value is silently rounded.

use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::linalg::Rational;
use crate::model::{Distribution, LengthVector, MarkovSource, TransitionGraph};
use crate::sptest::Codebook;

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl ToString) -> SpecFileError {
    SpecFileError::Field { field: field.into(), message: message.to_string() }
}

/// On-disk representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub symbols: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<bool>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codewords: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<u32>>,
}

/// Validated contents of a [`SourceSpecFile`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    pub description: Option<String>,
    pub names: Vec<String>,
    pub graph: TransitionGraph,
    pub source: Option<MarkovSource>,
    pub code: Option<Codebook>,
    pub lengths: Option<LengthVector>,
}

impl SourceSpec {
    /// Lengths from the codebook, or the explicit `lengths` field.
    pub fn length_vector(&self) -> Option<LengthVector> {
        self.code.as_ref().map(Codebook::lengths).or_else(|| self.lengths.clone())
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn to_file(&self) -> SourceSpecFile {
        let rat_row = |r: &[Rational]| r.iter().map(ToString::to_string).collect::<Vec<_>>();
        SourceSpecFile {
            description: self.description.clone(),
            symbols: self.names.clone(),
            transitions: self.source.as_ref().map(|s| s.transitions().iter().map(|r| rat_row(r)).collect()),
            adjacency: self.source.is_none().then(|| self.graph.rows().to_vec()),
            initial: self.source.as_ref().map(|s| rat_row(s.initial().probs())),
            codewords: self.code.as_ref().map(|c| c.words().iter().map(ToString::to_string).collect()),
            lengths: if self.code.is_none() {
                self.lengths.as_ref().map(|l| l.as_slice().to_vec())
            } else {
                None
            },
        }
    }
}

impl SourceSpecFile {
    pub fn from_json(text: &str) -> Result<Self, SpecFileError> {
        serde_json::from_str(text).map_err(|e| SpecFileError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpecFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| SpecFileError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<SourceSpec, SpecFileError> {
        let n = self.symbols.len();
        if n == 0 {
            return Err(field_err("symbols", "at least one symbol is required"));
        }
        for (i, name) in self.symbols.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(field_err(format!("symbols[{i}]"), "names must be nonempty and contain no whitespace"));
            }
            if self.symbols[..i].contains(name) {
                return Err(field_err(format!("symbols[{i}]"), format!("duplicate name {name:?}")));
            }
        }

        let (graph, source) = match (&self.transitions, &self.adjacency) {
            (Some(_), Some(_)) => {
                return Err(field_err("transitions", "give either `transitions` or `adjacency`, not both"))
            }
            (None, None) => return Err(field_err("transitions", "one of `transitions` or `adjacency` is required")),
            (Some(rows), None) => {
                check_square("transitions", rows, n)?;
                let p = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.iter()
                            .enumerate()
                            .map(|(j, x)| parse_rational(x).map_err(|m| field_err(format!("transitions[{i}][{j}]"), m)))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let initial = match &self.initial {
                    Some(v) => {
                        if v.len() != n {
                            return Err(field_err("initial", format!("expected {n} entries, got {}", v.len())));
                        }
                        v.iter()
                            .enumerate()
                            .map(|(i, x)| parse_rational(x).map_err(|m| field_err(format!("initial[{i}]"), m)))
                            .collect::<Result<Vec<_>, _>>()?
                    }
                    None => Distribution::uniform(n).into_inner(),
                };
                let src = MarkovSource::new(p, initial).map_err(|e| field_err("transitions", e))?;
                (src.graph().clone(), Some(src))
            }
            (None, Some(rows)) => {
                check_square("adjacency", rows, n)?;
                if self.initial.is_some() {
                    return Err(field_err("initial", "only allowed together with `transitions`"));
                }
                (TransitionGraph::new(rows.clone()).map_err(|e| field_err("adjacency", e))?, None)
            }
        };

        let code = match &self.codewords {
            Some(words) => {
                if words.len() != n {
                    return Err(field_err("codewords", format!("expected {n} entries, got {}", words.len())));
                }
                let parsed = words
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        if w.chars().any(|c| c != '0' && c != '1') {
                            return Err(field_err(format!("codewords[{i}]"), "only '0' and '1' are allowed"));
                        }
                        Ok(w.parse::<BitString>().expect("checked characters"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Codebook::new(parsed).map_err(|e| field_err("codewords", e))?)
            }
            None => None,
        };

        let lengths = match &self.lengths {
            Some(l) => {
                if l.len() != n {
                    return Err(field_err("lengths", format!("expected {n} entries, got {}", l.len())));
                }
                let lv = LengthVector::new(l.clone()).map_err(|e| field_err("lengths", e))?;
                if let Some(c) = &code {
                    if c.lengths() != lv {
                        return Err(field_err("lengths", "disagrees with the codeword lengths"));
                    }
                }
                Some(lv)
            }
            None => None,
        };

        Ok(SourceSpec {
            description: self.description.clone(),
            names: self.symbols.clone(),
            graph,
            source,
            code,
            lengths,
        })
    }
}

/// Loads and validates in one step.
pub fn load_spec(path: impl AsRef<Path>) -> Result<SourceSpec, SpecFileError> {
    SourceSpecFile::load(path)?.validate()
}

fn check_square<T>(field: &str, rows: &[Vec<T>], n: usize) -> Result<(), SpecFileError> {
    if rows.len() != n {
        return Err(field_err(field, format!("expected {n} rows, got {}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(field_err(format!("{field}[{i}]"), format!("expected {n} entries, got {}", r.len())));
        }
    }
    Ok(())
}

/// Parses `"a/b"` or `"a"` with integer `a`, `b`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("{s:?} is not an exact rational like \"1/2\""))?;
    let den: BigInt = den.parse().map_err(|_| format!("{s:?} is not an exact rational like \"1/2\""))?;
    if den == BigInt::from(0) {
        return Err(format!("{s:?} has a zero denominator"));
    }
    Ok(Rational::new(num, den))
}
