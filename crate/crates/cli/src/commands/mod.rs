pub mod boundary;
pub mod density;
pub mod filtration;
pub mod plotdata;
pub mod simulate;

use gewp::measures::transport::FLOW_ATOM_BUDGET;
use gewp::stats::median;
use serde_json::{json, Value};

use crate::report::Provenance;

pub fn num(x: f64) -> Value {
    json!(x)
}

pub fn monte_carlo(sample_size: usize, seeds: &[u64]) -> Provenance {
    Provenance::MonteCarlo { sample_size: sample_size as u64, seeds: seeds.to_vec() }
}

/// Column `i` of per-seed rows, reduced to its median.
pub fn column_median(rows: &[Vec<f64>], i: usize) -> f64 {
    median(&rows.iter().map(|r| r[i]).collect::<Vec<_>>())
}

/// Cells for discretizing ρ. Two letters use the linear-time transport route; more
/// letters go through min-cost flow, whose cost grows quickly with the support.
pub fn transport_bins(m: usize) -> usize {
    if m <= 2 {
        4096
    } else {
        FLOW_ATOM_BUDGET / (4 * m)
    }
}
