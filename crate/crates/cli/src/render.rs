//! Plain-text rendering of reports.

use std::fmt::Write;

use crate::report::*;

pub const STREAM_HEADER: &str = "# symbol codeword_end emitted_at lag\n";

fn labelled(names: &[String], values: &[impl std::fmt::Display]) -> String {
    names.iter().zip(values).map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(" ")
}

fn set(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn push_kraft(s: &mut String, k: &KraftReport) {
    let _ = writeln!(s, "lengths: {}", labelled(&k.symbols, &k.lengths));
    let _ = writeln!(s, "classic Kraft sum: {}", k.kraft_sum);
    match (&k.classification, k.radius_estimate, k.exact) {
        (Some(c), Some(r), Some(exact)) => {
            let how = if exact { "decided exactly" } else { "floating point" };
            let adm = if k.admissible == Some(true) { "admissible" } else { "no decodable code has these lengths" };
            let _ = writeln!(s, "spectral radius: {r:.9} ({how}) -> {c}, {adm}");
        }
        _ => {
            let _ = writeln!(s, "spectral radius: not classified (graph is not irreducible)");
        }
    }
    let pass = if k.counting_precheck { "passed" } else { "failed (more than 2^i codewords of length i)" };
    let _ = writeln!(s, "counting precheck: {pass}");
}

fn push_sp(s: &mut String, sp: &SpTestReport) {
    let _ = writeln!(s, "codewords: {}", labelled(&sp.symbols, &sp.codewords));
    let _ = writeln!(s, "suffix-set test: {}", sp.verdict);
    for (i, items) in sp.sets.iter().enumerate() {
        let _ = writeln!(s, "  S{} = {}", i + 1, set(items));
    }
    if let Some(r) = sp.repeat_of {
        let _ = writeln!(s, "  S{} repeats S{r}: unbounded decoding delay", sp.sets.len());
    }
    if let Some(d) = sp.delay_bound_bits {
        let _ = writeln!(s, "delay bound: {d} bits");
    }
    if let Some(w) = &sp.witness {
        push_witness(s, w);
    }
}

fn push_witness(s: &mut String, w: &WitnessReport) {
    let _ = writeln!(s, "collision: {} and {} both encode to {}", w.first.join(" "), w.second.join(" "), w.bits);
}

pub fn analyze(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    if let Some(d) = &r.description {
        let _ = writeln!(s, "{d}\n");
    }
    let _ = writeln!(s, "symbols: {}", r.symbols.join(" "));
    match r.period {
        Some(p) if r.irreducible => {
            let _ = writeln!(s, "graph: irreducible, period {p}");
        }
        _ => {
            let _ = writeln!(s, "graph: not irreducible");
        }
    }
    if let Some(mu) = &r.stationary {
        let _ = writeln!(s, "stationary distribution: {}", labelled(&r.symbols, mu));
    }
    if let Some(h) = r.entropy_rate {
        let _ = writeln!(s, "entropy rate: {h:.9} bits/symbol");
    }
    if let Some(m) = &r.mean_length {
        let _ = writeln!(s, "mean codeword length mu.l: {m} bits/symbol");
    }
    if let Some(k) = &r.kraft {
        push_kraft(&mut s, k);
    }
    if let Some(sp) = &r.sp_test {
        push_sp(&mut s, sp);
    }
    if !r.sweep.is_empty() {
        let _ = writeln!(s, "\n{:>4}  {:>12}  {:>12}  {:>12}  {:>10}", "k", "H(X1..Xk)", "E[l] exact", "E[l]", "E[l]-H");
        for row in &r.sweep {
            let _ = writeln!(
                s,
                "{:>4}  {:>12.6}  {:>12}  {:>12.6}  {:>10.6}",
                row.k,
                row.block_entropy,
                row.expected_length,
                row.expected_length_bits,
                row.expected_length_bits - row.block_entropy
            );
        }
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

pub fn kraft(k: &KraftReport) -> String {
    let mut s = String::new();
    let width = k.q.iter().flatten().map(String::len).max().unwrap_or(1);
    let _ = writeln!(s, "Q =");
    for (name, row) in k.symbols.iter().zip(&k.q) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
        let _ = writeln!(s, "  {name:>4} [ {} ]", cells.join("  "));
    }
    push_kraft(&mut s, k);
    if !k.power_sums.is_empty() {
        let _ = writeln!(s, "\n{:>4}  {:>24}  {:>6}  holds", "k", "1 Q^(k-1) L", "bound");
        for p in &k.power_sums {
            let _ = writeln!(s, "{:>4}  {:>24}  {:>6}  {}", p.k, p.lhs, p.rhs, if p.holds { "yes" } else { "NO" });
        }
    }
    s
}

pub fn sp_test(r: &SpTestReport) -> String {
    let mut s = String::new();
    push_sp(&mut s, r);
    s
}

pub fn oracle(r: &OracleReport) -> String {
    match &r.witness {
        Some(w) => {
            let mut s = String::new();
            push_witness(&mut s, w);
            s
        }
        None => format!("no collision with a common encoding of at most {} bits\n", r.budget),
    }
}

pub fn search(r: &SearchReport, top: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "length vectors with entries <= {}: {} ({} fail the counting precheck, {} fail the spectral condition)",
        r.max_len, r.length_vectors_total, r.pruned_by_counting, r.pruned_by_kraft
    );
    let _ = writeln!(
        s,
        "codebooks tested: {}; decodable up to bit complement: {}",
        r.candidates_tested,
        r.entries.len()
    );
    if r.entries.is_empty() {
        return s;
    }
    let _ = writeln!(s, "\n{:>5}  {:>8}  {:<22}  codewords", "rank", "mu.l", "verdict");
    for (i, e) in r.entries.iter().take(top).enumerate() {
        let _ = writeln!(
            s,
            "{:>5}  {:>8}  {:<22}  {}",
            i + 1,
            e.mean_length.as_deref().unwrap_or("-"),
            e.verdict,
            e.codewords.join(" ")
        );
    }
    if r.entries.len() > top {
        let _ = writeln!(s, "  ... {} more (use --top or --json)", r.entries.len() - top);
    }
    s
}

pub fn huffman(r: &HuffmanReport) -> String {
    let word = |w: &Option<String>| match w {
        Some(w) if w.is_empty() => "(empty)".to_string(),
        Some(w) => w.clone(),
        None => "-".to_string(),
    };
    let row = |ws: &[Option<String>]| {
        r.symbols.iter().zip(ws).map(|(n, w)| format!("{n}={}", word(w))).collect::<Vec<_>>().join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, "first symbol: {}", row(&r.initial));
    for (name, c) in r.symbols.iter().zip(&r.conditional) {
        let _ = writeln!(s, "after {name}: {}", row(c));
    }
    let _ = writeln!(s, "\n{:>4}  {:>12}  {:>12}  {:>12}", "k", "H(X1..Xk)", "Huffman", "codebook");
    for h in &r.sweep {
        let _ = writeln!(
            s,
            "{:>4}  {:>12.6}  {:>12}  {:>12}",
            h.k,
            h.block_entropy,
            h.huffman_length,
            h.code_length.as_deref().unwrap_or("-")
        );
    }
    s
}

pub fn emission_line(e: &EmissionRow) -> String {
    format!("{} {} {} {}\n", e.symbol, e.codeword_end, e.emitted_at, e.lag)
}

pub fn decode(r: &DecodeReport) -> String {
    match &r.emissions {
        Some(es) => {
            let mut s = STREAM_HEADER.to_string();
            for e in es {
                s.push_str(&emission_line(e));
            }
            s
        }
        None => format!("{}\n", r.symbols.join(" ")),
    }
}
