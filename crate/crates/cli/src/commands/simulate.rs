//! `gewp simulate`: trajectories per seed, invariant checks, RSS-to-Spread distances.

use anyhow::Result;
use gewp::sim::{rss_chain_diagnostics, simulate_gewp};
use gewp::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{column_median, monte_carlo, num};
use crate::config::ExperimentConfig;
use crate::report::{Artifacts, Check, Provenance, RunReport, Table};

#[derive(Serialize)]
struct CheckpointWord {
    n: usize,
    word: String,
}

#[derive(Serialize)]
struct CheckpointFile<'a> {
    seed: u64,
    horizon: usize,
    rho: &'a str,
    alphabet: &'a [String],
    /// One-based erasure slots `η_1..η_N`.
    eta: Vec<usize>,
    checkpoints: Vec<CheckpointWord>,
}

struct SeedRun {
    seed: u64,
    invariants: std::result::Result<(), Error>,
    tv: Vec<f64>,
    file: Vec<u8>,
}

pub fn invariant_check(seed: u64, outcome: &std::result::Result<(), Error>) -> Check {
    let c = Check::compare(
        format!("trajectory invariants, seed {seed}"),
        f64::from(u8::from(outcome.is_err())),
        "==",
        0.0,
        Provenance::Exact,
    );
    match outcome {
        Ok(()) => c,
        Err(e) => c.with_detail(e.to_string()),
    }
}

pub fn run(cfg: &ExperimentConfig, mut art: Artifacts) -> Result<RunReport> {
    let rho = cfg.rho_spec()?;
    let alphabet = cfg.alphabet()?;
    let runs: Vec<SeedRun> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<SeedRun> {
            let t = simulate_gewp(&rho, cfg.horizon, seed)?;
            let invariants = t.check_invariants();
            let tv = rss_chain_diagnostics(&t, &rho, cfg.rss_k, &cfg.checkpoints)?
                .into_iter()
                .map(|p| p.1)
                .collect();
            let words = t.checkpoint_words(&cfg.checkpoints)?;
            let file = CheckpointFile {
                seed,
                horizon: cfg.horizon,
                rho: rho.kind_name(),
                alphabet: &cfg.alphabet,
                eta: t.eta().to_one_based(),
                checkpoints: cfg
                    .checkpoints
                    .iter()
                    .zip(&words)
                    .map(|(&n, w)| CheckpointWord { n, word: alphabet.format_word(w) })
                    .collect(),
            };
            let mut bytes = serde_json::to_vec_pretty(&file)?;
            bytes.push(b'\n');
            Ok(SeedRun { seed, invariants, tv, file: bytes })
        })
        .collect::<Result<_>>()?;

    let mut report = RunReport::new("simulate", Some(cfg));
    for r in &runs {
        art.write_bytes(&format!("checkpoints-seed-{}.json", r.seed), &r.file)?;
        report.checks.push(invariant_check(r.seed, &r.invariants));
    }
    let k = cfg.rss_k;
    let tv_rows: Vec<Vec<f64>> = runs.iter().map(|r| r.tv.clone()).collect();
    let mut table = Table::new(
        format!("tv(RSS(W_n, {k}), Spread(rho, {k})) across seeds"),
        monte_carlo(cfg.seeds.len(), &cfg.seeds),
        &["n", "median", "min", "max"],
    );
    for (i, &n) in cfg.checkpoints.iter().enumerate() {
        let col: Vec<f64> = tv_rows.iter().map(|r| r[i]).collect();
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        table.push(vec![json!(n), num(column_median(&tv_rows, i)), num(lo), num(hi)]);
    }
    report.tables.push(table);
    let last = cfg.checkpoints.len() - 1;
    report.checks.push(Check::compare(
        format!("median tv to Spread at n = {}", cfg.checkpoints[last]),
        column_median(&tv_rows, last),
        "<",
        cfg.tolerances.tv_rss,
        monte_carlo(cfg.seeds.len(), &cfg.seeds),
    ));
    let csv_rows: Vec<Vec<String>> = runs
        .iter()
        .flat_map(|r| {
            cfg.checkpoints
                .iter()
                .zip(&r.tv)
                .map(move |(n, tv)| vec![r.seed.to_string(), n.to_string(), tv.to_string()])
        })
        .collect();
    art.write_csv("diagnostics.csv", &["seed", "n", "tv_rss"], &csv_rows)?;
    art.finish(&mut report)?;
    Ok(report)
}
