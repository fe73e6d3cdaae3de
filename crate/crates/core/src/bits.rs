//! Bitstrings as used by codebooks and encoders.
//!
//! Two serializations are supported:
//!
//! * text: ASCII `'0'`/`'1'`, one character per bit;
//! * packed: an 8-byte big-endian bit count followed by the bits packed
//!   most-significant-bit first. The final byte is zero-padded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An owned sequence of bits.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn starts_with(&self, prefix: &[bool]) -> bool {
        self.0.starts_with(prefix)
    }

    /// Bits after the first `n`.
    pub fn suffix_from(&self, n: usize) -> BitString {
        BitString(self.0[n..].to_vec())
    }

    /// Packs into the header + MSB-first byte layout.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.0.len().div_ceil(8));
        out.extend_from_slice(&(self.0.len() as u64).to_be_bytes());
        for chunk in self.0.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 0x80 >> i;
                }
            }
            out.push(byte);
        }
        out
    }

    /// Inverse of [`BitString::to_packed`]. Padding bits must be zero and
    /// no trailing bytes are allowed.
    pub fn from_packed(data: &[u8]) -> Result<Self> {
        if data.len() < 8 {
            return Err(Error::MalformedBits("packed data shorter than 8-byte header".into()));
        }
        let (header, body) = data.split_at(8);
        let count = u64::from_be_bytes(header.try_into().expect("8-byte header"));
        let count = usize::try_from(count)
            .map_err(|_| Error::MalformedBits("bit count does not fit in memory".into()))?;
        let need = count.div_ceil(8);
        if body.len() != need {
            return Err(Error::MalformedBits(format!(
                "header announces {count} bits ({need} bytes) but body has {} bytes",
                body.len()
            )));
        }
        let mut bits = Vec::with_capacity(count);
        for i in 0..count {
            bits.push(body[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        if count % 8 != 0 {
            let mask = 0xffu8 >> (count % 8);
            if body[need - 1] & mask != 0 {
                return Err(Error::MalformedBits("nonzero padding bits".into()));
            }
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses ASCII `'0'`/`'1'`. Whitespace is skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::MalformedBits(format!(
                        "unexpected character {c:?} at offset {i}"
                    )))
                }
            }
        }
        Ok(Self(bits))
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        Self(bits.to_vec())
    }
}

/// Shorthand used throughout tests: `bits("0110")`.
///
/// Panics on characters other than `0`, `1` and whitespace.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("literal bitstring")
}
