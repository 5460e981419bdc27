//! Directing measures ρ on `A × [0, 1]` with uniform position marginal.
//!
//! Every kind is stored in one normal form: `[0, 1]` is cut into pieces, and on each
//! piece the conditional letter probabilities are affine in the position,
//! `p_i(lo + t) = a_i + b_i t`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Atom, FiniteMeasure2D};
use crate::word::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoKind {
    /// `μ ⊗ unif[0, 1]`: letters independent of positions.
    Product { mu: Vec<f64> },
    /// `law(f(U), U)` for a step function `f`; `f(u) = letters[#{c in cuts : c <= u}]`.
    Threshold { cuts: Vec<f64>, letters: Vec<Letter> },
    /// Binary `law(1(V <= U), U)` with `U, V` iid uniform; `ρ({1} × [0, t]) = t²/2`.
    Triangular {},
    /// Bin `g` covers `(g/G, (g+1)/G]` and carries letter weights `weights[g]`.
    Grid { weights: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn mass(&self, i: usize) -> f64 {
        let w = self.width();
        self.a[i] * w + 0.5 * self.b[i] * w * w
    }

    /// `∫_{lo+s0}^{lo+s1} p_i`.
    fn integral(&self, i: usize, s0: f64, s1: f64) -> f64 {
        self.a[i] * (s1 - s0) + 0.5 * self.b[i] * (s1 * s1 - s0 * s0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSpec {
    m: usize,
    kind: RhoKind,
    pieces: Vec<Piece>,
    /// `cdf[q][i] = ρ({i} × [0, lo_q])`, with one extra row for `t = 1`.
    cdf: Vec<Vec<f64>>,
    /// Total variation between the supplied grid's position marginal and uniform.
    residual: f64,
}

fn check_prob_vector(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidRho(format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidRho(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

impl RhoSpec {
    pub fn new(m: usize, kind: RhoKind) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidRho("alphabet must be nonempty".into()));
        }
        let mut residual = 0.0;
        let pieces = match &kind {
            RhoKind::Product { mu } => {
                if mu.len() != m {
                    return Err(Error::InvalidRho(format!(
                        "mu has {} entries for {m} letters",
                        mu.len()
                    )));
                }
                check_prob_vector(mu, "mu")?;
                vec![Piece {
                    lo: 0.0,
                    hi: 1.0,
                    a: mu.clone(),
                    b: vec![0.0; m],
                }]
            }
            RhoKind::Threshold { cuts, letters } => {
                if letters.len() != cuts.len() + 1 {
                    return Err(Error::InvalidRho(format!(
                        "{} cuts need {} letters, got {}",
                        cuts.len(),
                        cuts.len() + 1,
                        letters.len()
                    )));
                }
                if let Some(&l) = letters.iter().find(|&&l| l as usize >= m) {
                    return Err(Error::LetterOutOfRange { letter: l as usize, size: m });
                }
                let mut bounds = vec![0.0];
                for &c in cuts {
                    if !(c > *bounds.last().unwrap() && c < 1.0) {
                        return Err(Error::InvalidRho(
                            "cuts must be strictly increasing inside (0, 1)".into(),
                        ));
                    }
                    bounds.push(c);
                }
                bounds.push(1.0);
                letters
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| {
                        let mut a = vec![0.0; m];
                        a[l as usize] = 1.0;
                        Piece {
                            lo: bounds[j],
                            hi: bounds[j + 1],
                            a,
                            b: vec![0.0; m],
                        }
                    })
                    .collect()
            }
            RhoKind::Triangular {} => {
                if m != 2 {
                    return Err(Error::NotBinary { size: m });
                }
                vec![Piece {
                    lo: 0.0,
                    hi: 1.0,
                    a: vec![1.0, 0.0],
                    b: vec![-1.0, 1.0],
                }]
            }
            RhoKind::Grid { weights } => {
                let g = weights.len();
                if g == 0 {
                    return Err(Error::InvalidRho("grid has no bins".into()));
                }
                let mut total = 0.0;
                for (j, row) in weights.iter().enumerate() {
                    if row.len() != m {
                        return Err(Error::InvalidRho(format!(
                            "grid bin {j} has {} weights for {m} letters",
                            row.len()
                        )));
                    }
                    if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                        return Err(Error::InvalidRho(format!("grid bin {j} has a bad weight")));
                    }
                    let s: f64 = row.iter().sum();
                    if s <= 0.0 {
                        return Err(Error::InvalidRho(format!(
                            "grid bin {j} is empty; its position mass cannot be restored"
                        )));
                    }
                    total += s;
                }
                residual = 0.5
                    * weights
                        .iter()
                        .map(|row| (row.iter().sum::<f64>() / total - 1.0 / g as f64).abs())
                        .sum::<f64>();
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, row)| {
                        let s: f64 = row.iter().sum();
                        Piece {
                            lo: j as f64 / g as f64,
                            hi: (j + 1) as f64 / g as f64,
                            a: row.iter().map(|x| x / s).collect(),
                            b: vec![0.0; m],
                        }
                    })
                    .collect()
            }
        };
        let mut cdf = Vec::with_capacity(pieces.len() + 1);
        let mut acc = vec![0.0; m];
        for p in &pieces {
            cdf.push(acc.clone());
            for (i, x) in acc.iter_mut().enumerate() {
                *x += p.mass(i);
            }
        }
        cdf.push(acc);
        Ok(Self {
            m,
            kind,
            pieces,
            cdf,
            residual,
        })
    }

    pub fn product(mu: Vec<f64>) -> Result<Self> {
        Self::new(mu.len(), RhoKind::Product { mu })
    }

    pub fn threshold(m: usize, cuts: Vec<f64>, letters: Vec<Letter>) -> Result<Self> {
        Self::new(m, RhoKind::Threshold { cuts, letters })
    }

    pub fn triangular() -> Self {
        Self::new(2, RhoKind::Triangular {}).expect("triangular kind is valid")
    }

    pub fn grid(weights: Vec<Vec<f64>>) -> Result<Self> {
        let m = weights.first().map_or(0, Vec::len);
        Self::new(m, RhoKind::Grid { weights })
    }

    /// ρ_w with each atom `(w_j, j/n)` spread uniformly over its bin. Both versions have the
    /// same Spread; the smeared one has a uniform position marginal.
    pub fn smeared_word(w: &Word, m: usize) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::WordTooShort { word: 0, required: 1 });
        }
        w.check_alphabet(m)?;
        let weights = w
            .iter()
            .map(|&l| {
                let mut row = vec![0.0; m];
                row[l as usize] = 1.0;
                row
            })
            .collect();
        Self::new(m, RhoKind::Grid { weights })
    }

    /// Bins a finite measure into `bins` position cells `(g/G, (g+1)/G]` (position 0 joins the first).
    pub fn from_grid_measure(measure: &FiniteMeasure2D, m: usize, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("bins must be positive".into()));
        }
        let mut weights = vec![vec![0.0; m]; bins];
        for a in measure.atoms() {
            if a.letter as usize >= m {
                return Err(Error::LetterOutOfRange { letter: a.letter as usize, size: m });
            }
            let g = ((a.position * bins as f64).ceil() as usize).clamp(1, bins) - 1;
            weights[g][a.letter as usize] += a.mass;
        }
        Self::new(m, RhoKind::Grid { weights })
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &RhoKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            RhoKind::Product { .. } => "product",
            RhoKind::Threshold { .. } => "threshold",
            RhoKind::Triangular {} => "triangular",
            RhoKind::Grid { .. } => "grid",
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Position-marginal correction applied to a grid; zero for the parametric kinds.
    pub fn projection_residual(&self) -> f64 {
        self.residual
    }

    pub fn is_parametric(&self) -> bool {
        !matches!(self.kind, RhoKind::Grid { .. })
    }

    /// `α_i = ρ({i} × [0, 1])`.
    pub fn alpha(&self) -> Vec<f64> {
        self.cdf.last().unwrap().clone()
    }

    fn piece_index(&self, u: f64) -> usize {
        let q = self.pieces.partition_point(|p| p.hi <= u);
        q.min(self.pieces.len() - 1)
    }

    /// Conditional letter probabilities given position `u`.
    pub fn cond_probs(&self, u: f64) -> Vec<f64> {
        let p = &self.pieces[self.piece_index(u)];
        let t = u - p.lo;
        (0..self.m).map(|i| (p.a[i] + p.b[i] * t).max(0.0)).collect()
    }

    /// Most probable letter at position `u`, lowest index on ties.
    pub fn map_letter(&self, u: f64) -> Letter {
        let p = self.cond_probs(u);
        let mut best = 0;
        for i in 1..self.m {
            if p[i] > p[best] {
                best = i;
            }
        }
        best as Letter
    }

    /// True when every conditional letter law is a point mass, i.e. ρ = law(f(U), U).
    pub fn is_deterministic_letter(&self) -> bool {
        self.pieces.iter().all(|p| {
            p.b.iter().all(|&b| b == 0.0) && p.a.iter().all(|&a| a == 0.0 || a == 1.0)
        })
    }

    /// The step function `f` when [`Self::is_deterministic_letter`] holds.
    pub fn letter_function(&self, u: f64) -> Option<Letter> {
        if let RhoKind::Threshold { cuts, letters } = &self.kind {
            return Some(letters[cuts.partition_point(|&c| c <= u)]);
        }
        if !self.is_deterministic_letter() {
            return None;
        }
        let p = &self.pieces[self.piece_index(u)];
        p.a.iter().position(|&a| a == 1.0).map(|i| i as Letter)
    }

    /// `ρ({i} × [0, t])`.
    pub fn letter_cdf(&self, i: usize, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let q = self.piece_index(t);
        let p = &self.pieces[q];
        self.cdf[q][i] + p.integral(i, 0.0, (t.min(p.hi) - p.lo).max(0.0))
    }

    /// Left-continuous inverse `inf{t : ρ({i} × [0, t]) >= s}` for `s ∈ [0, α_i]`.
    pub fn letter_quantile(&self, i: usize, s: f64) -> f64 {
        let total = self.cdf.last().unwrap()[i];
        let s = s.clamp(0.0, total);
        if s <= 0.0 {
            return 0.0;
        }
        let q = (0..self.pieces.len())
            .find(|&q| self.cdf[q + 1][i] >= s)
            .unwrap_or(self.pieces.len() - 1);
        let p = &self.pieces[q];
        let r = s - self.cdf[q][i];
        if r <= 0.0 {
            return p.lo;
        }
        let (a, b) = (p.a[i], p.b[i]);
        // root of b t²/2 + a t = r in the cancellation-free form
        let disc = (a * a + 2.0 * b * r).max(0.0);
        let denom = a + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { p.width() };
        p.lo + t.clamp(0.0, p.width())
    }

    /// One draw `(Y, U)`: `U` uniform, then `Y` from the conditional law at `U`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Letter, f64) {
        let u: f64 = rng.random();
        (self.letter_at(u, rng), u)
    }

    /// Draws a letter from the conditional law at position `u`.
    pub fn letter_at<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> Letter {
        if let Some(l) = self.letter_function(u) {
            return l;
        }
        let p = self.cond_probs(u);
        let x: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            acc += pi;
            if x < acc {
                return i as Letter;
            }
        }
        p.iter().rposition(|&pi| pi > 0.0).unwrap_or(0) as Letter
    }

    /// Atoms at the midpoints of `bins` equal cells carrying each cell's letter masses.
    /// The transport distance to ρ is at most `1 / (4 bins)`.
    pub fn discretize(&self, bins: usize) -> FiniteMeasure2D {
        let g = bins.max(1);
        let mut atoms = Vec::with_capacity(g * self.m);
        let mut q = 0;
        for j in 0..g {
            let (c0, c1) = (j as f64 / g as f64, (j + 1) as f64 / g as f64);
            let mut mass = vec![0.0; self.m];
            while q < self.pieces.len() && self.pieces[q].hi <= c0 {
                q += 1;
            }
            let mut r = q;
            while r < self.pieces.len() && self.pieces[r].lo < c1 {
                let p = &self.pieces[r];
                let s0 = c0.max(p.lo) - p.lo;
                let s1 = c1.min(p.hi) - p.lo;
                if s1 > s0 {
                    for (i, x) in mass.iter_mut().enumerate() {
                        *x += p.integral(i, s0, s1).max(0.0);
                    }
                }
                r += 1;
            }
            for (i, &x) in mass.iter().enumerate() {
                atoms.push(Atom {
                    letter: i as Letter,
                    position: (c0 + c1) / 2.0,
                    mass: x,
                });
            }
        }
        FiniteMeasure2D::aggregate(atoms)
    }
}
