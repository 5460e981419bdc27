//! `gewp boundary`: convergence of `W_n` to its directing measure, in both directions.

use anyhow::{bail, Result};
use gewp::filtration::rss_gap;
use gewp::measures::{
    certify_coupling_bound, rho_of_word, sample_spread_bound, sample_spread_distance, wasserstein_2d,
};
use gewp::sim::simulate_gewp;
use gewp::Word;
use rayon::prelude::*;
use serde_json::json;

use super::{column_median, monte_carlo, num, transport_bins};
use crate::config::ExperimentConfig;
use crate::report::{Artifacts, Check, Provenance, RunReport, Table};

/// Words in the exhaustive sweep are capped so the sweep stays interactive.
const SWEEP_WORD_LIMIT: usize = 1 << 20;

struct SweepRow {
    n: usize,
    k: usize,
    words: usize,
    worst_tv: f64,
    bound: f64,
    violations: usize,
}

fn coupling_sweep(m: usize, max_len: usize, max_k: usize) -> Result<Vec<SweepRow>> {
    let total: usize = (1..=max_len).map(|n| m.saturating_pow(n as u32)).sum();
    if total > SWEEP_WORD_LIMIT {
        bail!("coupling sweep over {total} words exceeds the limit of {SWEEP_WORD_LIMIT}; lower sweep_max_len");
    }
    let mut rows = Vec::new();
    for n in 1..=max_len {
        for k in 1..=n.min(max_k) {
            let certs: Vec<_> = Word::all(m, n)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|w| certify_coupling_bound(w, k, m))
                .collect::<gewp::Result<_>>()?;
            rows.push(SweepRow {
                n,
                k,
                words: certs.len(),
                worst_tv: certs.iter().map(|c| c.tv()).fold(0.0, f64::max),
                bound: certs[0].bound(),
                violations: certs.iter().filter(|c| !c.holds()).count(),
            });
        }
    }
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig, mut art: Artifacts) -> Result<RunReport> {
    let rho = cfg.rho_spec()?;
    let m = rho.alphabet_size();
    let mut report = RunReport::new("boundary", Some(cfg));

    let sweep = coupling_sweep(m, cfg.boundary.sweep_max_len, cfg.boundary.sweep_max_k)?;
    let mut table = Table::new(
        "coupling bound sweep: tv(RSS(w, k), Spread(rho_w, k)) against 1 - n!/((n-k)! n^k)",
        Provenance::Exact,
        &["n", "k", "words", "max tv", "bound", "violations"],
    );
    for r in &sweep {
        table.push(vec![json!(r.n), json!(r.k), json!(r.words), num(r.worst_tv), num(r.bound), json!(r.violations)]);
    }
    report.tables.push(table);
    let violations: usize = sweep.iter().map(|r| r.violations).sum();
    report.checks.push(
        Check::compare("coupling bound violations", violations as f64, "==", 0.0, Provenance::Exact).with_detail(format!(
            "all words over {m} letters with |w| <= {}, k <= {}",
            cfg.boundary.sweep_max_len, cfg.boundary.sweep_max_k
        )),
    );

    // forward direction: per seed and checkpoint, W(rho_{W_n}, rho) and tv(RSS, Spread)
    let bins = transport_bins(m);
    let target = rho.discretize(bins);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<_> {
            let t = simulate_gewp(&rho, cfg.horizon, seed)?;
            let (mut w, mut tv) = (Vec::new(), Vec::new());
            for &n in &cfg.checkpoints {
                let word = t.word(n)?;
                let emp = rho_of_word(&word)?;
                let emp = if m > 2 { emp.binned(bins) } else { emp };
                w.push(wasserstein_2d(&emp, &target)?);
                tv.push(rss_gap(&word, &rho, cfg.rss_k)?);
            }
            Ok((w, tv))
        })
        .collect::<Result<_>>()?;
    let w_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
    let tv_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let mc = monte_carlo(cfg.seeds.len(), &cfg.seeds);
    let k = cfg.rss_k;
    let mut table = Table::new(
        "medians across seeds",
        mc.clone(),
        &["n", "W(rho_Wn, rho)", &format!("tv(RSS(W_n, {k}), Spread(rho, {k}))")],
    );
    let (mut w_med, mut tv_med) = (Vec::new(), Vec::new());
    for (i, &n) in cfg.checkpoints.iter().enumerate() {
        w_med.push(column_median(&w_rows, i));
        tv_med.push(column_median(&tv_rows, i));
        table.push(vec![json!(n), num(w_med[i]), num(tv_med[i])]);
    }
    table.note = if m > 2 {
        format!("both measures binned into {bins} position cells (distance within {:.2e} of exact)", 1.0 / bins as f64)
    } else {
        format!("rho discretized into {bins} position cells (distance within {:.2e} of exact)", 0.5 / bins as f64)
    };
    report.tables.push(table);
    report.checks.push(Check::trend("Wasserstein to rho, median", &w_med, "decreasing", mc.clone()));
    report.checks.push(Check::trend("tv of RSS to Spread, median", &tv_med, "decreasing", mc));

    // backward direction: Sample(Spread(rho, k)) -> rho
    let mut table = Table::new(
        "W(Sample(Spread(rho, k)), rho) against its certified bound",
        Provenance::Bound,
        &["k", "distance", "bound"],
    );
    let mut worst_excess = f64::NEG_INFINITY;
    for &k in &cfg.boundary.sample_k {
        let d = sample_spread_distance(&rho, k, bins)?;
        let b = sample_spread_bound(k) + 0.5 / bins as f64;
        worst_excess = worst_excess.max(d - b);
        table.push(vec![json!(k), num(d), num(b)]);
    }
    report.tables.push(table);
    report.checks.push(
        Check::compare("Sample(Spread) distance minus bound, worst k", worst_excess, "<=", 0.0, Provenance::Bound)
            .with_detail(format!("k in {:?}", cfg.boundary.sample_k)),
    );

    let csv_rows: Vec<Vec<String>> = cfg
        .seeds
        .iter()
        .zip(&rows)
        .flat_map(|(seed, r)| {
            cfg.checkpoints.iter().enumerate().map(move |(i, n)| {
                vec![seed.to_string(), n.to_string(), r.0[i].to_string(), r.1[i].to_string()]
            })
        })
        .collect();
    art.write_csv("boundary.csv", &["seed", "n", "wasserstein", "tv_rss"], &csv_rows)?;
    art.finish(&mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gewp::measures::coupling_bound_i;

    #[test]
    fn sweep_bound_column_and_counts() {
        let rows = coupling_sweep(2, 5, 3).unwrap();
        for r in &rows {
            assert_eq!(r.words, 1 << r.n);
            assert!((r.bound - coupling_bound_i(r.n, r.k, 1.0)).abs() < 1e-15);
            assert_eq!(r.violations, 0);
        }
        assert!(coupling_sweep(4, 11, 2).is_err());
    }
}
