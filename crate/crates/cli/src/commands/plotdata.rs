//! `gewp plotdata`: CSV bundles of lattice paths, `set(ρ)` and rank anchors.

use anyhow::{bail, Result};
use gewp::filtration::{appendix_plot_data, simulate_dual, AppendixFrame};
use gewp::measures::{hausdorff, set_of_rho, set_of_rho_word_axes, PointSet2D};
use rayon::prelude::*;
use serde_json::json;

use super::{column_median, monte_carlo, num};
use crate::config::ExperimentConfig;
use crate::report::{Artifacts, Check, RunReport, Table};

fn points_csv(set: &PointSet2D) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    set.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn run(cfg: &ExperimentConfig, mut art: Artifacts) -> Result<RunReport> {
    if cfg.alphabet.len() != 2 {
        bail!("plotdata requires a binary alphabet, got {} letters", cfg.alphabet.len());
    }
    let rho = cfg.rho_spec()?;
    let rho_set = set_of_rho(&rho, cfg.plot.rho_points)?;
    let rho_word_axes = set_of_rho_word_axes(&rho, cfg.plot.rho_points)?;
    art.write_bytes("set-rho.csv", &points_csv(&rho_set)?)?;
    art.write_bytes("set-rho-word-axes.csv", &points_csv(&rho_word_axes)?)?;

    let frames: Vec<Vec<AppendixFrame>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<_> {
            let (t, dual) = simulate_dual(&rho, cfg.horizon, seed)?;
            Ok(appendix_plot_data(&t, &dual, cfg.plot.marks, &cfg.checkpoints)?)
        })
        .collect::<Result<_>>()?;

    let mut distances = Vec::new();
    for (seed, fs) in cfg.seeds.iter().zip(&frames) {
        let mut anchors = Vec::new();
        let mut row = Vec::new();
        for fr in fs {
            art.write_bytes(&format!("set-word-seed-{seed}-n-{}.csv", fr.n), &points_csv(&fr.set)?)?;
            row.push(hausdorff(&fr.set, &rho_word_axes));
            for i in 0..fr.u_anchors.len() {
                anchors.push(vec![
                    fr.n.to_string(),
                    (i + 1).to_string(),
                    fr.u_anchors[i].to_string(),
                    fr.u_true[i].to_string(),
                    fr.v_anchors[i].to_string(),
                    fr.v_true[i].to_string(),
                ]);
            }
        }
        art.write_csv(
            &format!("anchors-seed-{seed}.csv"),
            &["n", "mark", "u_anchor", "u", "v_anchor", "v"],
            &anchors,
        )?;
        distances.push(row);
    }

    let mut report = RunReport::new("plotdata", Some(cfg));
    let mc = monte_carlo(cfg.seeds.len(), &cfg.seeds);
    let mut table = Table::new("Hausdorff(set(W_n), set(rho)) across seeds", mc.clone(), &["n", "median"]);
    let med: Vec<f64> = (0..cfg.checkpoints.len()).map(|i| column_median(&distances, i)).collect();
    for (&n, &d) in cfg.checkpoints.iter().zip(&med) {
        table.push(vec![json!(n), num(d)]);
    }
    report.tables.push(table);
    report.checks.push(Check::trend("Hausdorff distance, median", &med, "decreasing", mc.clone()));
    report.checks.push(Check::compare(
        format!("Hausdorff distance at n = {}", cfg.checkpoints.last().unwrap()),
        *med.last().unwrap(),
        "<",
        cfg.tolerances.hausdorff,
        mc,
    ));
    art.finish(&mut report)?;
    Ok(report)
}
