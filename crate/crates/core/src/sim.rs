//! The ergodic word process driven by iid pairs `(Y_j, U_j) ~ ρ`:
//! `W_n = ios(Y_1..Y_n, U_1..U_n)` and `η_n` is the rank of `U_n` among `U_1..U_n`.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{density, rss_exact, tv_words};
use crate::measures::{rho_of_word, spread_exact, Atom, FiniteMeasure2D, RhoSpec};
use crate::order::{eraser_from_values, EraserPrefix};
use crate::rng::rng_for;
use crate::stats;
use crate::word::{erase, ios, os, Letter, Word};

/// Horizons up to this size keep every `W_n` in memory.
pub const MATERIALIZE_LIMIT: usize = 4096;

/// Rank identities are checked by brute force up to this horizon.
pub const BRUTE_RANK_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct GewpTrajectory {
    alphabet_size: usize,
    seed: u64,
    letters: Vec<Letter>,
    positions: Vec<f64>,
    eta: EraserPrefix,
    #[serde(skip)]
    words: Option<Vec<Word>>,
}

impl GewpTrajectory {
    /// Builds the trajectory of the driving pairs. Positions must be pairwise distinct.
    pub fn from_driving(m: usize, letters: Vec<Letter>, positions: Vec<f64>, seed: u64) -> Result<Self> {
        if letters.len() != positions.len() {
            return Err(Error::LengthMismatch { left: letters.len(), right: positions.len() });
        }
        if letters.is_empty() {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        Word(letters.clone()).check_alphabet(m)?;
        let mut seen = std::collections::HashMap::with_capacity(positions.len());
        for (j, &u) in positions.iter().enumerate() {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::InvalidArgument(format!("position {u} outside [0, 1]")));
            }
            if let Some(first) = seen.insert(u.to_bits(), j) {
                return Err(Error::DuplicateValue { first, second: j });
            }
        }
        let eta = eraser_from_values(&positions);
        let mut t = Self { alphabet_size: m, seed, letters, positions, eta, words: None };
        if t.horizon() <= MATERIALIZE_LIMIT {
            t.words = Some(t.build_words()?);
        }
        Ok(t)
    }

    fn build_words(&self) -> Result<Vec<Word>> {
        let n = self.horizon();
        let mut words = vec![Word::empty(); n];
        words[n - 1] = ios(&Word(self.letters.clone()), &self.positions)?;
        for step in (1..n).rev() {
            words[step - 1] = erase(&words[step], self.eta.at(step + 1))?;
        }
        Ok(words)
    }

    pub fn horizon(&self) -> usize {
        self.letters.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn eta(&self) -> &EraserPrefix {
        &self.eta
    }

    pub fn driving_letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn is_materialized(&self) -> bool {
        self.words.is_some()
    }

    /// `W_n` for `n` in `1..=N`.
    pub fn word(&self, n: usize) -> Result<Word> {
        if n == 0 || n > self.horizon() {
            return Err(Error::IndexOutOfRange { index: n, len: self.horizon() + 1 });
        }
        match &self.words {
            Some(ws) => Ok(ws[n - 1].clone()),
            None => ios(&Word(self.letters[..n].to_vec()), &self.positions[..n]),
        }
    }

    pub fn checkpoint_words(&self, checkpoints: &[usize]) -> Result<Vec<Word>> {
        checkpoints.iter().map(|&n| self.word(n)).collect()
    }

    /// Checks erasure coherence, the ios identity and the rank identity for every `n`.
    /// Beyond [`MATERIALIZE_LIMIT`] the words are walked down from `W_N` by erasure and
    /// compared with a fresh ios at `n = 2^j` and at every `n <= MATERIALIZE_LIMIT`.
    /// The rank identity is recounted by brute force up to [`BRUTE_RANK_LIMIT`] and by
    /// sorting beyond it.
    pub fn check_invariants(&self) -> Result<()> {
        let n_max = self.horizon();
        let full_ios = ios(&Word(self.letters.clone()), &self.positions)?;
        if self.word(n_max)? != full_ios {
            return Err(Error::InvariantViolation { invariant: "ios identity", step: n_max });
        }
        let mut next = full_ios;
        for n in (1..n_max).rev() {
            let erased = erase(&next, self.eta.at(n + 1))?;
            let fresh = n <= MATERIALIZE_LIMIT || n.is_power_of_two();
            if self.words.is_some() || fresh {
                let w = self.word(n)?;
                if w.len() != n {
                    return Err(Error::InvariantViolation { invariant: "word length", step: n });
                }
                if erased != w {
                    return Err(Error::InvariantViolation { invariant: "erasure coherence", step: n + 1 });
                }
                if fresh && ios(&Word(self.letters[..n].to_vec()), &self.positions[..n])? != w {
                    return Err(Error::InvariantViolation { invariant: "ios identity", step: n });
                }
            }
            next = erased;
        }
        if n_max <= BRUTE_RANK_LIMIT {
            for n in 0..n_max {
                let r = (0..n).filter(|&k| self.positions[k] < self.positions[n]).count();
                if r != self.eta.at(n + 1) {
                    return Err(Error::InvariantViolation { invariant: "rank identity", step: n + 1 });
                }
            }
        } else {
            // the sorted order of U_1..U_n must put U_n at slot η_n
            let mut sorted: Vec<f64> = Vec::with_capacity(n_max);
            for n in 0..n_max {
                let slot = sorted.partition_point(|&x| x < self.positions[n]);
                if slot != self.eta.at(n + 1) {
                    return Err(Error::InvariantViolation { invariant: "rank identity", step: n + 1 });
                }
                sorted.insert(slot, self.positions[n]);
            }
        }
        Ok(())
    }

    /// The letter erased at each step, `Y_j = W_{j, η_j}`.
    pub fn extract_erased_letters(&self) -> Result<Vec<Letter>> {
        extract_erased_letters(&self.word(self.horizon())?, &self.eta)
    }

    /// Empirical directing measure of `W_n`.
    pub fn estimate_directing_measure(&self, n: usize, mode: EstimatorMode) -> Result<FiniteMeasure2D> {
        let w = self.word(n)?;
        match mode {
            EstimatorMode::Position => rho_of_word(&w),
            EstimatorMode::EmpiricalU => {
                let u = os(&self.positions[..n]);
                Ok(FiniteMeasure2D::aggregate(
                    w.iter()
                        .zip(u)
                        .map(|(&letter, position)| Atom { letter, position, mass: 1.0 / n as f64 })
                        .collect(),
                ))
            }
        }
    }
}

/// Peels `W_N` back with `η_N, ..., η_1` and records the erased letters, returned in step order.
pub fn extract_erased_letters(w_n: &Word, eta: &EraserPrefix) -> Result<Vec<Letter>> {
    if w_n.len() != eta.horizon() {
        return Err(Error::LengthMismatch { left: w_n.len(), right: eta.horizon() });
    }
    let mut w = w_n.clone();
    let mut out = vec![0; w.len()];
    for step in (0..eta.horizon()).rev() {
        let slot = eta.at(step + 1);
        out[step] = w[slot];
        w = erase(&w, slot)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    /// `(1/n) Σ δ_{(W_{n,j}, U_{j:n})}`.
    EmpiricalU,
    /// `ρ_{W_n}`: letters at relative positions `j/n`.
    Position,
}

/// Draws the driving pairs directly from ρ; exact position collisions are redrawn.
pub fn simulate_gewp_with<R: Rng + ?Sized>(rho: &RhoSpec, n: usize, seed: u64, rng: &mut R) -> Result<GewpTrajectory> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let mut seen = HashSet::with_capacity(n);
    let (mut letters, mut positions) = (Vec::with_capacity(n), Vec::with_capacity(n));
    while letters.len() < n {
        let (y, u) = rho.sample(rng);
        if seen.insert(u.to_bits()) {
            letters.push(y);
            positions.push(u);
        }
    }
    GewpTrajectory::from_driving(rho.alphabet_size(), letters, positions, seed)
}

pub fn simulate_gewp(rho: &RhoSpec, n: usize, seed: u64) -> Result<GewpTrajectory> {
    simulate_gewp_with(rho, n, seed, &mut rng_for(seed))
}

fn check_checkpoints(t: &GewpTrajectory, k: usize, checkpoints: &[usize]) -> Result<()> {
    for &n in checkpoints {
        if n > t.horizon() {
            return Err(Error::IndexOutOfRange { index: n, len: t.horizon() + 1 });
        }
        if n < k {
            return Err(Error::WordTooShort { word: n, required: k });
        }
    }
    Ok(())
}

/// `tv(RSS(W_n, k), Spread(ρ, k))` at each checkpoint.
pub fn rss_chain_diagnostics(
    t: &GewpTrajectory,
    rho: &RhoSpec,
    k: usize,
    checkpoints: &[usize],
) -> Result<Vec<(usize, f64)>> {
    check_checkpoints(t, k, checkpoints)?;
    let spread = spread_exact(rho, k)?;
    checkpoints
        .iter()
        .map(|&n| {
            let rss = rss_exact(&t.word(n)?, k, t.alphabet_size())?;
            Ok((n, tv_words(&rss, &spread)?))
        })
        .collect()
}

/// `density(v, W_n)` at each checkpoint.
pub fn subsequence_density_trace(t: &GewpTrajectory, v: &Word, checkpoints: &[usize]) -> Result<Vec<(usize, f64)>> {
    check_checkpoints(t, v.len(), checkpoints)?;
    checkpoints
        .iter()
        .map(|&n| Ok((n, density(v, &t.word(n)?)?)))
        .collect()
}

/// Across-seed summary of one checkpoint of a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub n: usize,
    pub median: f64,
    pub std_dev: f64,
    pub values: Vec<f64>,
}

/// Median and spread across trajectories of a per-checkpoint series; a shrinking spread
/// is the ergodicity proxy.
pub fn summarize_series(series: &[Vec<(usize, f64)>]) -> Vec<CheckpointSummary> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, &(n, _))| {
            let values: Vec<f64> = series.iter().map(|s| s[i].1).collect();
            CheckpointSummary {
                n,
                median: stats::median(&values),
                std_dev: stats::std_dev(&values),
                values,
            }
        })
        .collect()
}
