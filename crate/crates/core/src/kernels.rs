//! Subsequence counts and densities, the random-subsequence kernel RSS(w, k), and
//! Chapman–Kolmogorov verification.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{erase, Letter, Word};

/// Largest `m^k` for which a dense distribution over `A^k` is built.
pub const MAX_TABLE: usize = 1 << 20;

/// Exact integer arithmetic is used when the binomial denominator stays below this.
pub const EXACT_DENOMINATOR_LIMIT: u128 = 1 << 63;

/// `C(n, k)` by the multiplicative formula; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    statrs::function::factorial::ln_binomial(n, k)
}

/// Probability vector over `A^k` in dense base-`m` order (first letter most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDistribution {
    m: usize,
    k: usize,
    weights: Vec<f64>,
}

pub(crate) fn table_size(m: usize, k: usize) -> Result<usize> {
    match m.checked_pow(k as u32) {
        Some(s) if s <= MAX_TABLE => Ok(s),
        _ => Err(Error::TooLarge {
            what: "word table m^k",
            size: m.checked_pow(k as u32).unwrap_or(usize::MAX),
            limit: MAX_TABLE,
        }),
    }
}

impl WordDistribution {
    /// Builds from raw weights; they must be nonnegative and sum to one within `1e-12`.
    pub fn new(m: usize, k: usize, weights: Vec<f64>) -> Result<Self> {
        let size = table_size(m, k)?;
        if weights.len() != size {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: size,
            });
        }
        if let Some(i) = weights.iter().position(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "weight {} at index {i} is not a nonnegative number",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Self { m, k, weights })
    }

    pub(crate) fn from_raw(m: usize, k: usize, weights: Vec<f64>) -> Self {
        Self { m, k, weights }
    }

    pub fn point_mass(m: usize, w: &Word) -> Result<Self> {
        w.check_alphabet(m)?;
        let mut weights = vec![0.0; table_size(m, w.len())?];
        weights[w.dense_index(m)] = 1.0;
        Ok(Self {
            m,
            k: w.len(),
            weights,
        })
    }

    pub fn uniform(m: usize, k: usize) -> Result<Self> {
        let size = table_size(m, k)?;
        Ok(Self {
            m,
            k,
            weights: vec![1.0 / size as f64; size],
        })
    }

    /// Empirical law of a sample of words.
    pub fn empirical<'a>(m: usize, k: usize, words: impl IntoIterator<Item = &'a Word>) -> Result<Self> {
        let counts = Self::counts(m, k, words)?;
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        Ok(Self {
            m,
            k,
            weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    /// Cell counts of a sample of words in dense order.
    pub fn counts<'a>(m: usize, k: usize, words: impl IntoIterator<Item = &'a Word>) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; table_size(m, k)?];
        for w in words {
            if w.len() != k {
                return Err(Error::LengthMismatch { left: w.len(), right: k });
            }
            w.check_alphabet(m)?;
            counts[w.dense_index(m)] += 1;
        }
        Ok(counts)
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn word_length(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, v: &Word) -> f64 {
        if v.len() != self.k || v.check_alphabet(self.m).is_err() {
            return 0.0;
        }
        self.weights[v.dense_index(self.m)]
    }

    /// Nonzero entries as `(word, probability)`.
    pub fn support(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (Word::from_dense_index(i, self.m, self.k), p))
    }

    /// Most likely word, lowest dense index on ties.
    pub fn mode(&self) -> (Word, f64) {
        let (i, &p) = self
            .weights
            .iter()
            .enumerate()
            .fold((0, &self.weights[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
        (Word::from_dense_index(i, self.m, self.k), p)
    }
}

/// Total variation distance `½ Σ |p(v) − q(v)|`.
pub fn tv_words(p: &WordDistribution, q: &WordDistribution) -> Result<f64> {
    if p.k != q.k || p.m != q.m {
        return Err(Error::LengthMismatch {
            left: p.k,
            right: q.k,
        });
    }
    Ok(0.5
        * p.weights
            .iter()
            .zip(&q.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Number of index tuples `j_1 < ... < j_k` with `w[j_i] = v[i]`.
pub fn count_embeddings(v: &Word, w: &Word) -> Result<u128> {
    let k = v.len();
    if k > w.len() {
        return Ok(0);
    }
    // d[j] = embeddings of v[..j] in the prefix of w read so far
    let mut d = vec![0u128; k + 1];
    d[0] = 1;
    for &x in w.iter() {
        for j in (1..=k).rev() {
            if v[j - 1] == x {
                d[j] = d[j].checked_add(d[j - 1]).ok_or(Error::Overflow("embedding count"))?;
            }
        }
    }
    Ok(d[k])
}

/// Subsequence density `count_embeddings(v, w) / C(|w|, |v|)`.
pub fn density(v: &Word, w: &Word) -> Result<f64> {
    let (k, n) = (v.len(), w.len());
    if k == 0 || k > n {
        return Err(Error::WordTooShort { word: n, required: k });
    }
    if let Some(den) = binomial(n as u64, k as u64).filter(|&d| d <= EXACT_DENOMINATOR_LIMIT) {
        let num = count_embeddings(v, w)?;
        return Ok(num as f64 / den as f64);
    }
    Ok(density_float(v, w))
}

/// Normalized recursion: after reading `i` letters, `d[j]` is the density of `v[..j]`
/// in `w[..i]`, so values stay in `[0, 1]` for any length.
fn density_float(v: &Word, w: &Word) -> f64 {
    let k = v.len();
    let mut d = vec![0.0f64; k + 1];
    d[0] = 1.0;
    for (i0, &x) in w.iter().enumerate() {
        let i = (i0 + 1) as f64;
        for j in (1..=k.min(i0 + 1)).rev() {
            let jf = j as f64;
            let hit = if v[j - 1] == x { d[j - 1] } else { 0.0 };
            d[j] = ((i - jf) / i) * d[j] + (jf / i) * hit;
        }
    }
    d[k]
}

fn check_k(w: &Word, k: usize) -> Result<()> {
    if k == 0 || k > w.len() {
        return Err(Error::InvalidArgument(format!(
            "subsequence length {k} must lie in 1..={}",
            w.len()
        )));
    }
    Ok(())
}

/// Embedding counts of every `v ∈ A^k` in `w`, in dense order, by one pass over `w`.
pub fn rss_counts(w: &Word, k: usize, m: usize) -> Result<Vec<u128>> {
    check_k(w, k)?;
    w.check_alphabet(m)?;
    let size = table_size(m, k)?;
    let den = binomial(w.len() as u64, k as u64);
    if den.is_none_or(|d| d > EXACT_DENOMINATOR_LIMIT) {
        return Err(Error::Overflow("binomial denominator above 2^63"));
    }
    // level j holds counts of every length-j prefix pattern
    let mut levels: Vec<Vec<u128>> = (0..=k).map(|j| vec![0; m.pow(j as u32)]).collect();
    levels[0][0] = 1;
    for (i, &x) in w.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            let (lo, hi) = levels.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for (p, &c) in prev.iter().enumerate() {
                if c != 0 {
                    cur[p * m + x as usize] += c;
                }
            }
        }
    }
    let out = levels.pop().unwrap();
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

/// The law RSS(w, k) of a uniformly chosen length-`k` subsequence.
pub fn rss_exact(w: &Word, k: usize, m: usize) -> Result<WordDistribution> {
    check_k(w, k)?;
    w.check_alphabet(m)?;
    let size = table_size(m, k)?;
    if let Some(den) = binomial(w.len() as u64, k as u64).filter(|&d| d <= EXACT_DENOMINATOR_LIMIT) {
        let counts = rss_counts(w, k, m)?;
        let weights = counts.iter().map(|&c| c as f64 / den as f64).collect();
        return Ok(WordDistribution::from_raw(m, k, weights));
    }
    // normalized recursion over all prefix patterns at once
    let mut levels: Vec<Vec<f64>> = (0..=k).map(|j| vec![0.0; m.pow(j as u32)]).collect();
    levels[0][0] = 1.0;
    for (i0, &x) in w.iter().enumerate() {
        let i = (i0 + 1) as f64;
        for j in (1..=k.min(i0 + 1)).rev() {
            let jf = j as f64;
            let keep = (i - jf) / i;
            let take = jf / i;
            let (lo, hi) = levels.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for v in cur.iter_mut() {
                *v *= keep;
            }
            for (p, &c) in prev.iter().enumerate() {
                cur[p * m + x as usize] += take * c;
            }
        }
    }
    let weights = levels.pop().unwrap();
    debug_assert_eq!(weights.len(), size);
    Ok(WordDistribution::from_raw(m, k, weights))
}

/// Subsequence at a uniformly chosen `k`-subset of positions.
pub fn rss_sample<R: Rng + ?Sized>(w: &Word, k: usize, rng: &mut R) -> Result<Word> {
    check_k(w, k)?;
    let mut idx = sample(rng, w.len(), k).into_vec();
    idx.sort_unstable();
    Ok(Word(idx.into_iter().map(|i| w[i]).collect()))
}

/// Iterated erasure `W_{j-1} = erase(W_j, η_j)` from `j = |w|` down to `down_to + 1`.
///
/// `eta_suffix[i]` is the 0-based value of `η_{down_to + 1 + i}`.
pub fn erase_chain(w: &Word, eta_suffix: &[usize], down_to: usize) -> Result<Word> {
    let n = w.len();
    if down_to > n || eta_suffix.len() != n - down_to {
        return Err(Error::InvalidEraser(format!(
            "need {} eraser values to go from length {n} to {down_to}, got {}",
            n.saturating_sub(down_to),
            eta_suffix.len()
        )));
    }
    let mut cur = w.clone();
    for step in (down_to + 1..=n).rev() {
        let e = eta_suffix[step - down_to - 1];
        if e >= step {
            return Err(Error::InvalidEraser(format!(
                "eta at step {step} is {e}, must be below {step}"
            )));
        }
        cur = erase(&cur, e)?;
    }
    Ok(cur)
}

/// Maximal deviation between RSS(w, k) and the two-step kernel through length `mid`.
///
/// When every binomial involved is small the comparison is made on exact integers
/// and the result is zero precisely when the identity holds; otherwise floating point.
pub fn chapman_kolmogorov_check(w: &Word, k: usize, mid: usize, m: usize) -> Result<f64> {
    check_k(w, k)?;
    if mid < k || mid > w.len() {
        return Err(Error::InvalidArgument(format!(
            "intermediate length {mid} must lie in {k}..={}",
            w.len()
        )));
    }
    if let Some(dev) = ck_exact(w, k, mid, m)? {
        return Ok(dev);
    }
    let direct = rss_exact(w, k, m)?;
    let step = rss_exact(w, mid, m)?;
    let mut two = vec![0.0; direct.weights.len()];
    for (u, pu) in step.support() {
        let inner = rss_exact(&u, k, m)?;
        for (t, q) in two.iter_mut().zip(&inner.weights) {
            *t += pu * q;
        }
    }
    Ok(direct
        .weights
        .iter()
        .zip(&two)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Integer form: `cnt_w(v)·C(n,mid)·C(mid,k)` against `C(n,k)·Σ_u cnt_w(u)·cnt_u(v)`.
fn ck_exact(w: &Word, k: usize, mid: usize, m: usize) -> Result<Option<f64>> {
    let n = w.len() as u64;
    let (Some(cnk), Some(cnm), Some(cmk)) = (
        binomial(n, k as u64),
        binomial(n, mid as u64),
        binomial(mid as u64, k as u64),
    ) else {
        return Ok(None);
    };
    let Some(den) = cnk.checked_mul(cnm).and_then(|x| x.checked_mul(cmk)) else {
        return Ok(None);
    };
    if cnk > EXACT_DENOMINATOR_LIMIT || cnm > EXACT_DENOMINATOR_LIMIT {
        return Ok(None);
    }
    let direct = rss_counts(w, k, m)?;
    let step = rss_counts(w, mid, m)?;
    let mut two = vec![0u128; direct.len()];
    for (ui, &cu) in step.iter().enumerate() {
        if cu == 0 {
            continue;
        }
        let u = Word::from_dense_index(ui, m, mid);
        for (t, &c) in two.iter_mut().zip(&rss_counts(&u, k, m)?) {
            let Some(s) = cu.checked_mul(c).and_then(|x| t.checked_add(x)) else {
                return Ok(None);
            };
            *t = s;
        }
    }
    let mut worst = 0.0f64;
    for (&d, &t) in direct.iter().zip(&two) {
        let (Some(lhs), Some(rhs)) = (
            d.checked_mul(cnm).and_then(|x| x.checked_mul(cmk)),
            t.checked_mul(cnk),
        ) else {
            return Ok(None);
        };
        if lhs != rhs {
            worst = worst.max(lhs.abs_diff(rhs) as f64 / den as f64);
        }
    }
    Ok(Some(worst))
}

/// Letters of a word drawn iid from `probs` (used in tests and sweeps).
pub fn random_word<R: Rng + ?Sized>(probs: &[f64], n: usize, rng: &mut R) -> Word {
    Word(
        (0..n)
            .map(|_| {
                let x: f64 = rng.random();
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if x < acc {
                        return i as Letter;
                    }
                }
                (probs.len() - 1) as Letter
            })
            .collect(),
    )
}
