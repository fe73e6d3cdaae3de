//! Builds reports from a loaded description file and dispatches verbs.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use constrained_codes::codec::{
    build_conditional_huffman, decode, encode, huffman_expected_length, Emission, StreamDecoder,
};
use constrained_codes::linalg::to_f64;
use constrained_codes::model::{block_entropy, entropy_rate, expected_code_length, stationary_distribution};
use constrained_codes::search::{brute_force_ud, search_codebooks};
use constrained_codes::specfile::{load_spec, SourceSpec};
use constrained_codes::spectral::{build_q, counting_precheck, kraft_check, kraft_lhs, kraft_rhs, kraft_sum};
use constrained_codes::sptest::sp_test;
use constrained_codes::{BitString, Codebook, CollisionWitness, Error, LengthVector, Symbol};
use serde::Serialize;

use crate::report::*;
use crate::{render, BitFormat, Cli, CliError, Command};

type Result<T> = std::result::Result<T, CliError>;

pub fn execute(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let k = cli.k as usize;
    match &cli.command {
        Command::Analyze { file } => emit(cli, out, &analyze(&load(file)?, k)?, render::analyze),
        Command::Kraft { file } => {
            let spec = load(file)?;
            let l = lengths_of(&spec)?;
            if !spec.graph.is_irreducible() {
                return Err(Error::NotIrreducible.into());
            }
            emit(cli, out, &kraft_report(&spec, &l, k)?, render::kraft)
        }
        Command::SpTest { file } => {
            let spec = load(file)?;
            let code = code_of(&spec)?;
            emit(cli, out, &sp_report(&spec, code)?, render::sp_test)
        }
        Command::Oracle { file, budget } => emit(cli, out, &oracle(&load(file)?, *budget)?, render::oracle),
        Command::Search { file, max_len, top } => {
            let report = search(&load(file)?, *max_len, cli.threads)?;
            emit(cli, out, &report, |r| render::search(r, *top))
        }
        Command::HuffmanBaseline { file } => emit(cli, out, &huffman(&load(file)?, k)?, render::huffman),
        Command::Encode { file, input } => {
            let spec = load(file)?;
            let text = String::from_utf8(read_input(input.as_deref(), stdin)?)
                .map_err(|_| CliError::InvalidSequence("input is not UTF-8".into()))?;
            let bits = encode_names(&spec, &text)?;
            if cli.json {
                emit(cli, out, &EncodeReport { length: bits.len(), bits: bits.to_string() }, |_| String::new())
            } else {
                match cli.format {
                    BitFormat::Text => write_out(out, format!("{bits}\n").as_bytes()),
                    BitFormat::Packed => write_out(out, &bits.to_packed()),
                }
            }
        }
        Command::Decode { file, input, stream } => {
            let spec = load(file)?;
            let code = code_of(&spec)?;
            if *stream && !cli.json && cli.format == BitFormat::Text {
                return stream_text(&spec, code, input.as_deref(), stdin, out);
            }
            let raw = read_input(input.as_deref(), stdin)?;
            let bits = parse_bits(&raw, cli.format)?;
            let report = if *stream {
                let emissions = constrained_codes::codec::stream_decode(&spec.graph, code, &bits)
                    .map_err(|e| decode_error(&spec, e))?;
                DecodeReport {
                    symbols: emissions.iter().map(|e| spec.names[e.symbol].clone()).collect(),
                    emissions: Some(emissions.iter().map(|e| emission_row(&spec, e)).collect()),
                }
            } else {
                let seq = decode(&spec.graph, code, &bits).map_err(|e| decode_error(&spec, e))?;
                DecodeReport { symbols: names(&spec, &seq), emissions: None }
            };
            emit(cli, out, &report, render::decode)
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, out: &mut dyn Write, report: &T, text: impl Fn(&T) -> String) -> Result<()> {
    let body = if cli.json {
        let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
        s.push('\n');
        s
    } else {
        text(report)
    };
    write_out(out, body.as_bytes())
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io { context: "writing output".into(), source })
}

pub fn load(path: &Path) -> Result<SourceSpec> {
    load_spec(path).map_err(|source| CliError::Spec { path: path.display().to_string(), source })
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) => {
            buf = std::fs::read(p).map_err(|source| CliError::Io { context: p.display().to_string(), source })?
        }
        None => {
            stdin
                .read_to_end(&mut buf)
                .map_err(|source| CliError::Io { context: "reading stdin".into(), source })?;
        }
    }
    Ok(buf)
}

fn code_of(spec: &SourceSpec) -> Result<&Codebook> {
    spec.code.as_ref().ok_or_else(|| CliError::Usage("the file has no `codewords`".into()))
}

fn lengths_of(spec: &SourceSpec) -> Result<LengthVector> {
    spec.length_vector()
        .ok_or_else(|| CliError::Usage("the file has neither `codewords` nor `lengths`".into()))
}

fn names(spec: &SourceSpec, seq: &[Symbol]) -> Vec<String> {
    seq.iter().map(|&s| spec.names[s].clone()).collect()
}

fn witness(spec: &SourceSpec, w: &CollisionWitness) -> WitnessReport {
    WitnessReport { first: names(spec, &w.seq_a), second: names(spec, &w.seq_b), bits: w.bits.to_string() }
}

pub fn analyze(spec: &SourceSpec, k_max: usize) -> Result<AnalyzeReport> {
    let irreducible = spec.graph.is_irreducible();
    let mut notes = Vec::new();
    let lengths = spec.length_vector();
    let (mut stationary, mut rate, mut mean_length) = (None, None, None);
    let mut sweep = Vec::new();

    match &spec.source {
        None => notes.push("no transition probabilities: entropy fields omitted".to_string()),
        Some(src) => {
            if irreducible {
                let mu = stationary_distribution(src)?;
                stationary = Some(mu.probs().iter().map(ToString::to_string).collect());
                rate = Some(entropy_rate(src)?);
                if let Some(l) = &lengths {
                    let m: constrained_codes::Rational =
                        mu.probs().iter().zip(l.as_rationals()).map(|(p, x)| p * x).sum();
                    mean_length = Some(m.to_string());
                }
            } else {
                notes.push(format!("{}: stationary distribution and entropy rate omitted", Error::NotIrreducible));
            }
            if let Some(l) = &lengths {
                for k in 1..=k_max {
                    let el = expected_code_length(src, l, k)?;
                    sweep.push(SweepRow {
                        k,
                        block_entropy: block_entropy(src, k),
                        expected_length_bits: to_f64(&el),
                        expected_length: el.to_string(),
                    });
                }
            }
        }
    }

    let kraft = match &lengths {
        Some(l) => Some(kraft_report(spec, l, 0)?),
        None => {
            notes.push("no codewords or lengths: spectral condition and suffix-set test omitted".into());
            None
        }
    };
    if !irreducible && lengths.is_some() {
        notes.push("the spectral condition only applies to irreducible graphs".into());
    }
    let sp = match &spec.code {
        Some(c) => Some(sp_report(spec, c)?),
        None => None,
    };
    Ok(AnalyzeReport {
        description: spec.description.clone(),
        symbols: spec.names.clone(),
        irreducible,
        period: if irreducible { spec.graph.period() } else { None },
        stationary,
        entropy_rate: rate,
        mean_length,
        kraft,
        sp_test: sp,
        sweep,
        notes,
    })
}

/// `power_k = 0` skips the power-sum table.
pub fn kraft_report(spec: &SourceSpec, l: &LengthVector, power_k: usize) -> Result<KraftReport> {
    let q = build_q(&spec.graph, l)?;
    let verdict = if spec.graph.is_irreducible() { Some(kraft_check(&spec.graph, l)?) } else { None };
    let mut power_sums = Vec::new();
    for k in 1..=power_k {
        let lhs = kraft_lhs(&spec.graph, l, k)?;
        let rhs = kraft_rhs(l, k);
        power_sums.push(PowerSumRow { k, holds: lhs <= rhs, lhs: lhs.to_string(), rhs: rhs.to_string() });
    }
    Ok(KraftReport {
        symbols: spec.names.clone(),
        lengths: l.as_slice().to_vec(),
        q: q.entries().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
        classification: verdict.as_ref().map(|v| format!("{:?}", v.classification)),
        radius_estimate: verdict.as_ref().map(|v| v.radius_estimate),
        exact: verdict.as_ref().map(|v| v.exact),
        admissible: verdict.as_ref().map(|v| v.classification.is_admissible()),
        kraft_sum: kraft_sum(l).to_string(),
        counting_precheck: counting_precheck(l),
        power_sums,
    })
}

pub fn sp_report(spec: &SourceSpec, code: &Codebook) -> Result<SpTestReport> {
    let r = sp_test(&spec.graph, code)?;
    Ok(SpTestReport {
        symbols: spec.names.clone(),
        codewords: code.words().iter().map(ToString::to_string).collect(),
        verdict: format!("{:?}", r.verdict),
        sets: r
            .sets
            .iter()
            .map(|set| {
                set.iter()
                    .map(|s| format!("{}:{}:{}", spec.names[s.left], s.bits, spec.names[s.right]))
                    .collect()
            })
            .collect(),
        repeat_of: r.repeat_of,
        delay_bound_bits: r.delay_bound_bits,
        witness: r.witness.as_ref().map(|w| witness(spec, w)),
    })
}

pub fn oracle(spec: &SourceSpec, budget: Option<usize>) -> Result<OracleReport> {
    let code = code_of(spec)?;
    let budget = budget.unwrap_or(8 * spec.graph.len() * code.max_len());
    let found = brute_force_ud(&spec.graph, code, budget).map_err(|e| match e {
        Error::TooLarge(m) => CliError::Usage(format!("{m}; try a smaller --budget")),
        e => e.into(),
    })?;
    Ok(OracleReport { budget, witness: found.as_ref().map(|w| witness(spec, w)) })
}

pub fn search(spec: &SourceSpec, max_len: u32, threads: Option<usize>) -> Result<SearchReport> {
    let run = || search_codebooks(&spec.graph, max_len, spec.source.as_ref());
    let result = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(run),
        None => run(),
    }
    .map_err(|e| match e {
        Error::TooLarge(m) => CliError::Usage(format!("{m}; reduce --max-len")),
        e => e.into(),
    })?;
    Ok(SearchReport {
        max_len,
        length_vectors_total: result.length_vectors_total,
        pruned_by_counting: result.pruned_by_counting,
        pruned_by_kraft: result.pruned_by_kraft,
        candidates_tested: result.candidates_tested,
        entries: result
            .entries
            .iter()
            .map(|e| SearchRow {
                codewords: e.codebook.words().iter().map(ToString::to_string).collect(),
                mean_length: e.expected_length.as_ref().map(ToString::to_string),
                verdict: format!("{:?}", e.verdict),
            })
            .collect(),
    })
}

pub fn huffman(spec: &SourceSpec, k_max: usize) -> Result<HuffmanReport> {
    let src = spec
        .source
        .as_ref()
        .ok_or_else(|| CliError::Usage("the file has no `transitions`; Huffman codes need probabilities".into()))?;
    let ch = build_conditional_huffman(src);
    let words = |c: &constrained_codes::codec::SubCode| -> Vec<Option<String>> {
        c.words().iter().map(|w| w.as_ref().map(ToString::to_string)).collect()
    };
    let lengths = spec.length_vector();
    let mut sweep = Vec::new();
    for k in 1..=k_max {
        sweep.push(HuffmanRow {
            k,
            block_entropy: block_entropy(src, k),
            huffman_length: huffman_expected_length(src, k).to_string(),
            code_length: match &lengths {
                Some(l) => Some(expected_code_length(src, l, k)?.to_string()),
                None => None,
            },
        });
    }
    Ok(HuffmanReport { symbols: spec.names.clone(), initial: words(&ch.first), conditional: ch.rows.iter().map(words).collect(), sweep })
}

/// Maps whitespace-separated names to symbols and encodes them.
pub fn encode_names(spec: &SourceSpec, text: &str) -> Result<BitString> {
    let code = code_of(spec)?;
    let mut seq = Vec::new();
    for (i, name) in text.split_whitespace().enumerate() {
        let s = spec
            .symbol_index(name)
            .ok_or_else(|| CliError::InvalidSequence(format!("position {i}: unknown symbol {name:?}")))?;
        if let Some(&prev) = seq.last() {
            if !spec.graph.allows(prev, s) {
                return Err(CliError::InvalidSequence(format!(
                    "position {i}: {name} cannot follow {}",
                    spec.names[prev]
                )));
            }
        }
        seq.push(s);
    }
    if seq.is_empty() {
        return Err(CliError::InvalidSequence("no symbols in input".into()));
    }
    encode(&spec.graph, code, &seq).map_err(Into::into)
}

fn parse_bits(raw: &[u8], format: BitFormat) -> Result<BitString> {
    let bits = match format {
        BitFormat::Text => std::str::from_utf8(raw)
            .map_err(|_| CliError::Usage("bit input is not UTF-8 text".into()))?
            .parse::<BitString>(),
        BitFormat::Packed => BitString::from_packed(raw),
    };
    bits.map_err(|e| CliError::Usage(e.to_string()))
}

fn decode_error(spec: &SourceSpec, e: Error) -> CliError {
    match e {
        Error::NoParse => CliError::NoParse("no valid symbol sequence has this encoding".into()),
        Error::AmbiguousParse { bits, first, second } => CliError::Ambiguous(format!(
            "\"{bits}\" is the encoding of both {} and {}",
            names(spec, &first).join(" "),
            names(spec, &second).join(" ")
        )),
        e => e.into(),
    }
}

fn emission_row(spec: &SourceSpec, e: &Emission) -> EmissionRow {
    EmissionRow {
        symbol: spec.names[e.symbol].clone(),
        codeword_end: e.codeword_end,
        emitted_at: e.emitted_at,
        lag: e.lag(),
    }
}

/// Text-mode streaming: bits are consumed as they arrive and each symbol is
/// printed as soon as it is determined.
fn stream_text(
    spec: &SourceSpec,
    code: &Codebook,
    input: Option<&Path>,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> Result<()> {
    let file;
    let reader: Box<dyn Read + '_> = match input {
        Some(p) => {
            file = std::fs::File::open(p).map_err(|source| CliError::Io { context: p.display().to_string(), source })?;
            Box::new(file)
        }
        None => Box::new(stdin),
    };
    let mut reader = BufReader::new(reader);
    let mut dec = StreamDecoder::new(&spec.graph, code)?;
    write_out(out, render::STREAM_HEADER.as_bytes())?;
    let mut offset = 0usize;
    loop {
        let chunk = reader.fill_buf().map_err(|source| CliError::Io { context: "reading input".into(), source })?;
        if chunk.is_empty() {
            break;
        }
        let len = chunk.len();
        let mut lines = String::new();
        for &byte in chunk {
            offset += 1;
            let bit = match byte {
                b'0' => false,
                b'1' => true,
                b if b.is_ascii_whitespace() => continue,
                b => {
                    return Err(CliError::Usage(format!(
                        "malformed bitstring: unexpected byte {:?} at offset {}",
                        b as char,
                        offset - 1
                    )))
                }
            };
            for e in dec.push_bit(bit).map_err(|e| decode_error(spec, e))? {
                lines.push_str(&render::emission_line(&emission_row(spec, &e)));
            }
        }
        reader.consume(len);
        write_out(out, lines.as_bytes())?;
    }
    let mut lines = String::new();
    for e in dec.finish().map_err(|e| decode_error(spec, e))? {
        lines.push_str(&render::emission_line(&emission_row(spec, &e)));
    }
    write_out(out, lines.as_bytes())
}
