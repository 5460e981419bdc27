//! `gewp density`: subsequence density of a word literal in every corpus line.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gewp::{density, Alphabet, Word};
use serde_json::json;

use super::num;
use crate::report::{Artifacts, Provenance, RunReport, Table};

/// Corpus lines that hold a word: blank lines and `#` comments are skipped, and line
/// numbers stay those of the file.
pub fn parse_corpus(text: &str, alphabet: &Alphabet) -> Result<Vec<(usize, Word)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let w = alphabet.parse_word(t).map_err(|e| anyhow!("line {}: {e}", i + 1))?;
        out.push((i + 1, w));
    }
    Ok(out)
}

pub fn run(corpus: &Path, literal: &str, alphabet: &Alphabet, out: Option<Artifacts>) -> Result<RunReport> {
    let text = std::fs::read_to_string(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
    let v = alphabet.parse_word(literal).map_err(|e| anyhow!("word literal: {e}"))?;
    if v.is_empty() {
        bail!("word literal is empty");
    }
    let words = parse_corpus(&text, alphabet)?;
    if words.is_empty() {
        bail!("corpus {} has no words", corpus.display());
    }
    let short: Vec<String> = words
        .iter()
        .filter(|(_, w)| w.len() < v.len())
        .map(|(ln, w)| format!("line {ln}: length {} is below |v| = {}", w.len(), v.len()))
        .collect();
    if !short.is_empty() {
        bail!("{}", short.join("; "));
    }
    // lines of strictly growing length are read as checkpoints of one trajectory
    let sequence = words.windows(2).all(|p| p[0].1.len() < p[1].1.len()) && words.len() > 1;
    let mut columns = vec!["line", "length", "density"];
    if sequence {
        columns.push("change");
    }
    let mut table = Table::new(format!("density of \"{}\"", alphabet.format_word(&v)), Provenance::Exact, &columns);
    let mut prev: Option<f64> = None;
    let mut csv_rows = Vec::new();
    for (ln, w) in &words {
        let d = density(&v, w)?;
        let mut row = vec![json!(ln), json!(w.len()), num(d)];
        let mut csv_row = vec![ln.to_string(), w.len().to_string(), d.to_string()];
        if sequence {
            let change = prev.map(|p| d - p);
            row.push(change.map_or(serde_json::Value::Null, num));
            csv_row.push(change.map_or(String::new(), |c| c.to_string()));
        }
        prev = Some(d);
        table.push(row);
        csv_rows.push(csv_row);
    }
    let mut report = RunReport::new("density", None);
    report.tables.push(table);
    if let Some(mut art) = out {
        art.write_csv("density.csv", &columns, &csv_rows)?;
        art.finish(&mut report)?;
    }
    Ok(report)
}
