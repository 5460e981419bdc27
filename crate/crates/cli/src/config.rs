//! Experiment configuration: one TOML file, unknown keys rejected.
//! The schema is documented in `docs/config.md`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gewp::measures::{RhoKind, SET_OF_RHO_POINTS};
use gewp::{Alphabet, RhoSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alphabet: Vec<String>,
    pub rho: RhoKind,
    /// Length `N` of simulated trajectories.
    pub horizon: usize,
    pub checkpoints: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Monte-Carlo replicates per seed where a check averages over replicates.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Subsequence length `k` for RSS and Spread comparisons.
    #[serde(default = "default_rss_k")]
    pub rss_k: usize,
    /// Not echoed into reports, so that reruns into different directories compare equal.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub filtration: FiltrationConfig,
    #[serde(default)]
    pub plot: PlotConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    /// Longest word in the exhaustive coupling-bound sweep.
    pub sweep_max_len: usize,
    pub sweep_max_k: usize,
    /// Spread orders `k` for the Sample∘Spread distance.
    pub sample_k: Vec<usize>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { sweep_max_len: 8, sweep_max_k: 4, sample_k: vec![1, 2, 4, 8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiltrationConfig {
    /// Length `n` of the word reconstructed from an innovation tail.
    pub word_length: usize,
    /// Tail horizons `N` of the match-rate curve, ascending.
    pub horizons: Vec<usize>,
    /// Trajectory length for the exact identity and reconstruction checks.
    pub dual_length: usize,
}

impl Default for FiltrationConfig {
    fn default() -> Self {
        Self { word_length: 5, horizons: vec![1_000, 10_000, 100_000], dual_length: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlotConfig {
    /// Number of marked draws whose rank anchors are traced.
    pub marks: usize,
    pub rho_points: usize,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self { marks: 5, rho_points: SET_OF_RHO_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub alpha: f64,
    pub tv_rss: f64,
    pub match_rate: f64,
    pub hausdorff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { alpha: 0.01, tv_rss: 0.05, match_rate: 0.95, hausdorff: 0.05 }
    }
}

fn default_replicates() -> usize {
    20
}

fn default_rss_k() -> usize {
    2
}

fn strictly_ascending(v: &[usize]) -> bool {
    v.windows(2).all(|p| p[0] < p[1])
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.alphabet()?;
        self.rho_spec()?;
        if self.seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        let mut seen = HashSet::new();
        for s in &self.seeds {
            if !seen.insert(s) {
                bail!("seed {s} appears more than once");
            }
        }
        if self.checkpoints.is_empty() || self.checkpoints[0] == 0 {
            bail!("checkpoints must be nonempty and positive");
        }
        if !strictly_ascending(&self.checkpoints) {
            bail!("checkpoints must be strictly ascending");
        }
        if *self.checkpoints.last().unwrap() > self.horizon {
            bail!("last checkpoint exceeds horizon {}", self.horizon);
        }
        if self.replicates == 0 {
            bail!("replicates must be positive");
        }
        if self.rss_k == 0 || self.rss_k > self.checkpoints[0] {
            bail!("rss_k must be in 1..={}", self.checkpoints[0]);
        }
        let f = &self.filtration;
        if f.word_length == 0 || f.horizons.is_empty() || f.horizons[0] < f.word_length {
            bail!("filtration horizons must be nonempty and at least word_length");
        }
        if !strictly_ascending(&f.horizons) {
            bail!("filtration horizons must be strictly ascending");
        }
        if f.dual_length == 0 {
            bail!("filtration dual_length must be positive");
        }
        if self.boundary.sample_k.contains(&0) || self.boundary.sweep_max_k == 0 {
            bail!("boundary orders must be positive");
        }
        if self.plot.marks > self.checkpoints[0] || self.plot.rho_points < 2 {
            bail!("plot marks must not exceed the first checkpoint and rho_points must be at least 2");
        }
        let t = &self.tolerances;
        for (name, v) in [("alpha", t.alpha), ("tv_rss", t.tv_rss), ("match_rate", t.match_rate), ("hausdorff", t.hausdorff)] {
            if !(v > 0.0 && v <= 1.0) {
                bail!("tolerance {name} must be in (0, 1], got {v}");
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.alphabet.iter().cloned()).context("alphabet")
    }

    pub fn rho_spec(&self) -> Result<RhoSpec> {
        RhoSpec::new(self.alphabet.len(), self.rho.clone()).context("rho")
    }

    pub fn override_seeds(&mut self, seeds: Vec<u64>) -> Result<()> {
        self.seeds = seeds;
        self.validate()
    }
}
