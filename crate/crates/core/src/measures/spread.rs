//! Spread(ρ, k): the law of `ios(Y_1..Y_k, U_1..U_k)` for `(Y_i, U_i)` iid ρ.
//!
//! For a fixed word `v`, `P(v) = k! F_v(1)` where `F_∅ = 1` and
//! `F_{vx}(u) = ∫_0^u F_v(s) p_x(s) ds`. On each piece of ρ these are polynomials in
//! the local coordinate, so a depth-first walk over the prefix trie computes the whole
//! table exactly up to floating-point rounding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{table_size, WordDistribution};
use crate::measures::RhoSpec;
use crate::word::{ps, Letter, Word};

/// Polynomial coefficients of `F_v` on each piece, in the local coordinate.
type PiecePolys = Vec<Vec<f64>>;

fn extend(rho: &RhoSpec, parent: &PiecePolys, x: usize) -> (PiecePolys, f64) {
    let mut out = Vec::with_capacity(parent.len());
    let mut base = 0.0;
    for (p, c) in rho.pieces().iter().zip(parent) {
        let (a, b) = (p.a[x], p.b[x]);
        let mut poly = vec![0.0; c.len() + 2];
        poly[0] = base;
        if a != 0.0 || b != 0.0 {
            for (d, &cd) in c.iter().enumerate() {
                // ∫ c_d t^d (a + b t) dt
                poly[d + 1] += a * cd / (d + 1) as f64;
                poly[d + 2] += b * cd / (d + 2) as f64;
            }
        }
        let w = p.width();
        base = poly.iter().rev().fold(0.0, |acc, &cf| acc * w + cf);
        out.push(poly);
    }
    (out, base)
}

/// Exact Spread(ρ, k) as a dense table over `A^k`.
pub fn spread_exact(rho: &RhoSpec, k: usize) -> Result<WordDistribution> {
    let m = rho.alphabet_size();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let size = table_size(m, k)?;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let root: PiecePolys = rho.pieces().iter().map(|_| vec![1.0]).collect();
    let mut weights = vec![0.0; size];
    // explicit stack of (depth, dense prefix index, polynomials)
    let mut stack = vec![(0usize, 0usize, root)];
    while let Some((depth, idx, polys)) = stack.pop() {
        for x in 0..m {
            let (child, total) = extend(rho, &polys, x);
            let cidx = idx * m + x;
            if depth + 1 == k {
                weights[cidx] = (fact * total).max(0.0);
            } else if total > 0.0 {
                stack.push((depth + 1, cidx, child));
            }
        }
    }
    Ok(WordDistribution::from_raw(m, k, weights))
}

/// Exact Spread(ρ_w, k) for the atomic ρ_w: counts `N_v` of index tuples in `[n]^k` whose
/// stably sorted letters read `v`, returned with the common denominator `n^k`.
pub fn spread_of_word_counts(w: &Word, k: usize, m: usize) -> Result<(Vec<u128>, u128)> {
    let n = w.len();
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("word and k must be nonempty".into()));
    }
    w.check_alphabet(m)?;
    let size = table_size(m, k)?;
    let den = (n as u128)
        .checked_pow(k as u32)
        .ok_or(Error::Overflow("n^k"))?;
    // binomial table up to k
    let mut binom = vec![vec![0u128; k + 1]; k + 1];
    for i in 0..=k {
        binom[i][0] = 1;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
        }
    }
    let mut counts = vec![0u128; size];
    for (vi, slot) in counts.iter_mut().enumerate() {
        let v = Word::from_dense_index(vi, m, k);
        // run[l] = length of the constant block of v ending at l (1-based)
        let mut run = vec![0usize; k + 1];
        for l in 1..=k {
            run[l] = if l > 1 && v[l - 1] == v[l - 2] { run[l - 1] + 1 } else { 1 };
        }
        // e[l]: ordered tuples of length l placed in bins 1..=g that read v[..l]
        let mut e = vec![0u128; k + 1];
        e[0] = 1;
        for &letter in w.iter() {
            for l in (1..=k).rev() {
                if v[l - 1] != letter {
                    continue;
                }
                let mut add = 0u128;
                for c in 1..=run[l] {
                    add += binom[l][c] * e[l - c];
                }
                e[l] += add;
            }
        }
        *slot = e[k];
    }
    debug_assert_eq!(counts.iter().sum::<u128>(), den);
    Ok((counts, den))
}

/// One draw from Spread(ρ, k).
pub fn spread_draw<R: Rng + ?Sized>(rho: &RhoSpec, k: usize, rng: &mut R) -> Word {
    let mut ys: Vec<Letter> = Vec::with_capacity(k);
    let mut us = Vec::with_capacity(k);
    for _ in 0..k {
        let (y, u) = rho.sample(rng);
        ys.push(y);
        us.push(u);
    }
    Word(ps(&us).images().iter().map(|&j| ys[j]).collect())
}

/// Empirical law of `reps` independent draws from Spread(ρ, k).
pub fn spread_sample<R: Rng + ?Sized>(
    rho: &RhoSpec,
    k: usize,
    reps: usize,
    rng: &mut R,
) -> Result<WordDistribution> {
    if reps == 0 || k == 0 {
        return Err(Error::InvalidArgument("k and reps must be positive".into()));
    }
    let draws: Vec<Word> = (0..reps).map(|_| spread_draw(rho, k, rng)).collect();
    WordDistribution::empirical(rho.alphabet_size(), k, &draws)
}
