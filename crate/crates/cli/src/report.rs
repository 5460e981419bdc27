//! Run reports: JSON for machines, an aligned text summary for people.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

/// Where a number comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    Bound,
    MonteCarlo { sample_size: u64, seeds: Vec<u64> },
}

impl Provenance {
    fn label(&self) -> String {
        match self {
            Provenance::Exact => "exact".into(),
            Provenance::Bound => "bound".into(),
            Provenance::MonteCarlo { sample_size, seeds } => {
                format!("monte-carlo(n={sample_size}, seeds={})", seed_list(seeds))
            }
        }
    }
}

fn seed_list(seeds: &[u64]) -> String {
    if seeds.len() <= 4 {
        return seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    }
    format!("{},{},..,{} [{}]", seeds[0], seeds[1], seeds[seeds.len() - 1], seeds.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// How `value` is compared with `threshold`, e.g. `<=` or `decreasing`.
    pub relation: String,
    pub threshold: Option<f64>,
    pub pass: bool,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn compare(name: impl Into<String>, value: f64, relation: &str, threshold: f64, provenance: Provenance) -> Self {
        let pass = match relation {
            "<" => value < threshold,
            "<=" => value <= threshold,
            ">=" => value >= threshold,
            "==" => value == threshold,
            _ => panic!("unknown relation {relation}"),
        };
        Self {
            name: name.into(),
            value,
            relation: relation.into(),
            threshold: Some(threshold),
            pass,
            provenance,
            detail: String::new(),
        }
    }

    /// A trend check over a series; `value` is its last entry.
    pub fn trend(name: impl Into<String>, series: &[f64], relation: &str, provenance: Provenance) -> Self {
        let pass = series.windows(2).all(|p| match relation {
            "decreasing" => p[1] < p[0],
            "nondecreasing" => p[1] >= p[0],
            _ => panic!("unknown trend {relation}"),
        });
        Self {
            name: name.into(),
            value: series.last().copied().unwrap_or(f64::NAN),
            relation: relation.into(),
            threshold: None,
            pass,
            provenance,
            detail: series.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" -> "),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Table {
    pub fn new(name: impl Into<String>, provenance: Provenance, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            provenance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            note: String::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Option<ExperimentConfig>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub artifacts: Vec<String>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn aligned(header: &[String], rows: &[Vec<String>], out: &mut String) {
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let line: Vec<String> = r.iter().zip(&width).map(|(c, &w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "  {}", line.join("  ").trim_end());
    }
}

impl RunReport {
    pub fn new(command: &str, config: Option<&ExperimentConfig>) -> Self {
        Self {
            command: command.into(),
            config: config.cloned(),
            checks: Vec::new(),
            tables: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(
            out,
            "gewp {}: {} checks, {} failed",
            self.command,
            self.checks.len(),
            failed
        );
        if !self.checks.is_empty() {
            let header: Vec<String> = ["check", "value", "criterion", "result", "provenance"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        format!("{:.6}", c.value),
                        match c.threshold {
                            Some(t) => format!("{} {t}", c.relation),
                            None => c.relation.clone(),
                        },
                        if c.pass { "pass" } else { "FAIL" }.into(),
                        c.provenance.label(),
                    ]
                })
                .collect();
            out.push('\n');
            aligned(&header, &rows, &mut out);
            for c in self.checks.iter().filter(|c| !c.detail.is_empty()) {
                let _ = writeln!(out, "  {}: {}", c.name, c.detail);
            }
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n{} [{}]", t.name, t.provenance.label());
            if !t.note.is_empty() {
                let _ = writeln!(out, "  note: {}", t.note);
            }
            let rows: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            aligned(&t.columns, &rows, &mut out);
        }
        if !self.artifacts.is_empty() {
            let _ = writeln!(out, "\nartifacts:");
            for a in &self.artifacts {
                let _ = writeln!(out, "  {a}");
            }
        }
        out
    }
}

/// Files written under one output directory, recorded by relative path.
pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes the report (listing every artifact so far) and its text summary.
    pub fn finish(mut self, report: &mut RunReport) -> Result<()> {
        report.artifacts = std::mem::take(&mut self.written);
        let json = format!("{}-report.json", report.command);
        let text = format!("{}-summary.txt", report.command);
        report.artifacts.push(json.clone());
        report.artifacts.push(text.clone());
        self.write_json(&json, report)?;
        self.write_bytes(&text, report.summary().as_bytes())
    }
}
