//! Measures on `A × [0, 1]`, the maps ρ_w, Sample and Spread, transport and
//! Hausdorff distances, and the coupling bounds.

pub mod bounds;
pub mod geometry;
pub mod quantize;
pub mod rho;
pub mod spread;
pub mod transport;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::WordDistribution;
use crate::word::{Letter, Word};

pub use bounds::{
    certify_coupling_bound, coupling_bound_i, coupling_bound_i_exact, coupling_bound_ii, sample_spread_bound,
    CouplingCertificate, McEstimate,
};
pub use geometry::{
    hausdorff, hausdorff_word_rho, set_of_rho, set_of_rho_word_axes, set_of_word, PointSet2D,
    SET_OF_RHO_POINTS,
};
pub use quantize::{quantize_interval_alphabet, DyadicQuantizer};
pub use rho::{RhoKind, RhoSpec};
pub use spread::{spread_exact, spread_of_word_counts, spread_sample};
pub use transport::{wasserstein_2d, wasserstein_upper_bound};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub letter: Letter,
    pub position: f64,
    pub mass: f64,
}

/// Finitely supported probability measure on `A × [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure2D {
    atoms: Vec<Atom>,
}

impl FiniteMeasure2D {
    /// Validates ranges and total mass, then merges atoms at the same point and sorts them.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.position) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has position {} outside [0, 1]",
                    a.position
                )));
            }
            if !(a.mass >= 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {i} has mass {}", a.mass)));
            }
            total += a.mass;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}")));
        }
        Ok(Self::aggregate(atoms))
    }

    pub(crate) fn aggregate(mut atoms: Vec<Atom>) -> Self {
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|a, b| {
            a.letter
                .cmp(&b.letter)
                .then(a.position.total_cmp(&b.position))
        });
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match out.last_mut() {
                Some(last) if last.letter == a.letter && last.position == a.position => {
                    last.mass += a.mass
                }
                _ => out.push(a),
            }
        }
        Self { atoms: out }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Largest letter index plus one.
    pub fn letter_span(&self) -> usize {
        self.atoms.iter().map(|a| a.letter as usize + 1).max().unwrap_or(0)
    }

    pub fn letter_marginal(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for a in &self.atoms {
            if (a.letter as usize) < m {
                out[a.letter as usize] += a.mass;
            }
        }
        out
    }

    /// `ρ({letter} × [0, t])`.
    pub fn letter_cdf(&self, letter: Letter, t: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.letter == letter && a.position <= t)
            .map(|a| a.mass)
            .sum()
    }

    /// Every atom moved to the midpoint of its cell among `bins` equal cells of `[0, 1]`,
    /// the same midpoints as [`RhoSpec::discretize`]; no atom moves more than `1 / (2 bins)`.
    pub fn binned(&self, bins: usize) -> Self {
        let g = bins.max(1);
        Self::aggregate(
            self.atoms
                .iter()
                .map(|a| {
                    let cell = ((a.position * g as f64) as usize).min(g - 1);
                    Atom { position: (cell as f64 + 0.5) / g as f64, ..*a }
                })
                .collect(),
        )
    }

    /// CSV with header `letter,position,mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["letter", "position", "mass"]).map_err(io)?;
        for a in &self.atoms {
            w.write_record([a.letter.to_string(), a.position.to_string(), a.mass.to_string()])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// ρ_w: the law of `(w_J, J/n)` with `J` uniform on `1..=n`.
pub fn rho_of_word(w: &Word) -> Result<FiniteMeasure2D> {
    if w.is_empty() {
        return Err(Error::WordTooShort { word: 0, required: 1 });
    }
    let n = w.len() as f64;
    Ok(FiniteMeasure2D::aggregate(
        w.iter()
            .enumerate()
            .map(|(j, &l)| Atom {
                letter: l,
                position: (j + 1) as f64 / n,
                mass: 1.0 / n,
            })
            .collect(),
    ))
}

/// Sample(μ) = Σ_v μ(v) ρ_v.
pub fn sample_map(mu: &WordDistribution) -> FiniteMeasure2D {
    let k = mu.word_length();
    let m = mu.alphabet_size();
    // aggregate by (letter, slot) directly
    let mut mass = vec![0.0; m * k];
    for (v, p) in mu.support() {
        for (j, &l) in v.iter().enumerate() {
            mass[l as usize * k + j] += p / k as f64;
        }
    }
    FiniteMeasure2D::aggregate(
        mass.iter()
            .enumerate()
            .map(|(idx, &p)| Atom {
                letter: (idx / k) as Letter,
                position: (idx % k + 1) as f64 / k as f64,
                mass: p,
            })
            .collect(),
    )
}

/// `W(Sample(Spread(ρ, k)), ρ)` with ρ replaced by its `bins`-cell discretization, which
/// moves the distance by at most `1 / (2 bins)`.
pub fn sample_spread_distance(rho: &RhoSpec, k: usize, bins: usize) -> Result<f64> {
    wasserstein_2d(&sample_map(&spread_exact(rho, k)?), &rho.discretize(bins))
}
