//! `ccode`: command-line front end for constrained-source code analysis.
//!
//! Exit codes: 0 success, 1 usage/input/other errors, 2 invalid symbol
//! sequence, 3 bits with no valid parse, 4 bits with two valid parses.

pub mod commands;
pub mod render;
pub mod report;

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use constrained_codes::specfile::SpecFileError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_SEQUENCE: i32 = 2;
pub const EXIT_NO_PARSE: i32 = 3;
pub const EXIT_AMBIGUOUS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ccode", version, about = "Codes for sources with forbidden symbol transitions")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest block length k in entropy/length sweeps and power sums.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub k: u64,
    /// Bit representation for encode output and decode input.
    #[arg(long, global = true, value_enum, default_value_t = BitFormat::Text)]
    pub format: BitFormat,
    /// Worker threads for `search` (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BitFormat {
    /// ASCII '0'/'1'; whitespace is ignored on input.
    Text,
    /// 8-byte big-endian bit count, then bits packed MSB-first.
    Packed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report: irreducibility, entropies, spectral condition, suffix-set test, k-sweep.
    Analyze { file: PathBuf },
    /// Substitution matrix, spectral radius verdict and power-sum bound.
    Kraft { file: PathBuf },
    /// Labelled suffix-set decodability test.
    SpTest { file: PathBuf },
    /// Encode whitespace-separated symbol names.
    Encode {
        file: PathBuf,
        /// Read symbols from this file instead of stdin.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Decode a bitstring back to symbol names.
    Decode {
        file: PathBuf,
        /// Read bits from this file instead of stdin.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Decode incrementally and report when each symbol could be emitted.
        #[arg(long)]
        stream: bool,
    },
    /// Brute-force search for two sequences with equal encodings.
    Oracle {
        file: PathBuf,
        /// Longest common encoding to try, in bits (default 8·n·l_max).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Exhaustive search for decodable codebooks for the file's graph.
    Search {
        file: PathBuf,
        /// Longest codeword length to consider.
        #[arg(long, default_value_t = 2)]
        max_len: u32,
        /// Rows shown in text output (JSON lists all).
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Per-state Huffman codes and their expected lengths.
    HuffmanBaseline { file: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Spec { path: String, source: SpecFileError },
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("invalid symbol sequence: {0}")]
    InvalidSequence(String),
    #[error("no valid parse: {0}")]
    NoParse(String),
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("{0}")]
    Core(constrained_codes::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidSequence(_) => EXIT_INVALID_SEQUENCE,
            CliError::NoParse(_) => EXIT_NO_PARSE,
            CliError::Ambiguous(_) => EXIT_AMBIGUOUS,
            _ => EXIT_FAILURE,
        }
    }
}

impl From<constrained_codes::Error> for CliError {
    fn from(e: constrained_codes::Error) -> Self {
        CliError::Core(e)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::execute(&cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "ccode: {e}");
            e.exit_code()
        }
    }
}
