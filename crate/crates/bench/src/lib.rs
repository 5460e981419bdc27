//! Shared fixtures for the benchmarks.

use gewp::measures::rho_of_word;
use gewp::sim::simulate_gewp;
use gewp::{FiniteMeasure2D, RhoSpec, Word};

/// `W_n` of a triangular trajectory, a word whose letters drift from 0 to 1.
pub fn triangular_word(n: usize, seed: u64) -> Word {
    simulate_gewp(&RhoSpec::triangular(), n, seed).unwrap().word(n).unwrap()
}

/// Empirical measures of two independent binary words of length `n`.
pub fn binary_measure_pair(n: usize) -> (FiniteMeasure2D, FiniteMeasure2D) {
    (
        rho_of_word(&triangular_word(n, 1)).unwrap(),
        rho_of_word(&triangular_word(n, 2)).unwrap(),
    )
}
