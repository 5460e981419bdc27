//! Dyadic quantization of `[0, 1]`-valued letters onto `2^m` levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RhoSpec;
use crate::word::{Letter, Word};

/// Largest supported depth; `2^16` levels still fit in [`Letter`].
pub const MAX_DEPTH: u32 = 16;

/// The map `u ↦ ⌈2^m u⌉`, with `u = 0` sent to level 1 so that there are exactly `2^m`
/// levels. Level `l` is the interval `((l − 1)/2^m, l/2^m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicQuantizer {
    depth: u32,
}

pub fn quantize_interval_alphabet(m: u32) -> Result<DyadicQuantizer> {
    if m == 0 || m > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "quantization depth must be in 1..={MAX_DEPTH}, got {m}"
        )));
    }
    Ok(DyadicQuantizer { depth: m })
}

impl DyadicQuantizer {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn levels(&self) -> usize {
        1 << self.depth
    }

    /// Level in `1..=2^m`.
    pub fn level(&self, u: f64) -> usize {
        let scaled = (u.clamp(0.0, 1.0) * self.levels() as f64).ceil() as usize;
        scaled.clamp(1, self.levels())
    }

    /// Zero-based letter, `level − 1`.
    pub fn letter(&self, u: f64) -> Letter {
        (self.level(u) - 1) as Letter
    }

    pub fn interval(&self, level: usize) -> (f64, f64) {
        let n = self.levels() as f64;
        ((level - 1) as f64 / n, level as f64 / n)
    }

    /// Level one step coarser that contains the given level of this quantizer.
    pub fn parent_level(&self, level: usize) -> usize {
        level.div_ceil(2)
    }

    pub fn quantize_word(&self, values: &[f64]) -> Word {
        Word(values.iter().map(|&u| self.letter(u)).collect())
    }

    /// Push `law(f(U), U)` forward, where `f` is the step function equal to `values[i]`
    /// between consecutive `cuts`: the result is `law(q(f(U)), U)` as a threshold measure.
    pub fn push_step_function(&self, cuts: Vec<f64>, values: &[f64]) -> Result<RhoSpec> {
        let letters = values.iter().map(|&v| self.letter(v)).collect();
        RhoSpec::threshold(self.levels(), cuts, letters)
    }
}
