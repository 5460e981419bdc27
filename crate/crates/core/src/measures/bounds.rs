//! Coupling bounds between RSS laws, Spread laws and Sample measures.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::kernels::{binomial, rss_counts};
use crate::measures::spread::spread_of_word_counts;
use crate::word::Word;

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
}

/// `C · (1 − n! / ((n − k)! n^k))`: the collision probability of `k` uniform draws
/// from `[n]`, scaled by the diameter `C`.
pub fn coupling_bound_i(n: usize, k: usize, c: f64) -> f64 {
    if n == 0 {
        return c;
    }
    let no_collision: f64 = (0..k).map(|i| (n as f64 - i as f64).max(0.0) / n as f64).product();
    c * (1.0 - no_collision)
}

/// The same bound at `C = 1` as an exact fraction `(numerator, denominator)`, when it fits.
pub fn coupling_bound_i_exact(n: usize, k: usize) -> Option<(u128, u128)> {
    let den = (n as u128).checked_pow(k as u32)?;
    let mut falling = 1u128;
    for i in 0..k {
        falling = falling.checked_mul(n.saturating_sub(i) as u128)?;
    }
    Some((den - falling, den))
}

/// Monte-Carlo estimate of `E|R_k / k − R_m / m|`, where `R_j` is the rank of `U_1`
/// among `U_1..U_j` and all ranks come from one shared uniform sequence.
pub fn coupling_bound_ii<R: Rng + ?Sized>(k: usize, m: usize, reps: usize, rng: &mut R) -> McEstimate {
    assert!(k >= 1 && m >= 1 && reps >= 1, "k, m and reps must be positive");
    if k == m {
        return McEstimate { mean: 0.0, std_err: 0.0, reps };
    }
    let (lo, hi) = (k.min(m), k.max(m));
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..reps {
        let u1: f64 = rng.random();
        let mut below = 0usize;
        let mut r_lo = 1;
        for j in 2..=hi {
            if rng.random::<f64>() < u1 {
                below += 1;
            }
            if j == lo {
                r_lo = below + 1;
            }
        }
        let r_hi = below + 1;
        let x = (r_lo as f64 / lo as f64 - r_hi as f64 / hi as f64).abs();
        sum += x;
        sum_sq += x * x;
    }
    let n = reps as f64;
    let mean = sum / n;
    let var = if reps > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    McEstimate { mean, std_err: (var / n).sqrt(), reps }
}

/// `E|X − c|` for `X ~ Beta(a, b)`.
fn beta_abs_dev(a: f64, b: f64, c: f64) -> f64 {
    let mu = a / (a + b);
    let f = Beta::new(a, b).expect("positive shape").cdf(c);
    let f1 = Beta::new(a + 1.0, b).expect("positive shape").cdf(c);
    (mu - c) + 2.0 * (c * f - mu * f1)
}

/// `(1/k) Σ_r E|U_(r) − r/k|` over the order statistics of `k` uniforms: the expected
/// transport cost of moving `k` iid positions onto the lattice `1/k, ..., 1`. It bounds
/// the distance between ρ and Sample(Spread(ρ, k)) and tends to zero like `k^{-1/2}`.
pub fn sample_spread_bound(k: usize) -> f64 {
    assert!(k >= 1, "k must be positive");
    let kf = k as f64;
    (1..=k)
        .map(|r| beta_abs_dev(r as f64, kf - r as f64 + 1.0, r as f64 / kf))
        .sum::<f64>()
        / kf
}

/// Both sides of `tv(RSS(w, k), Spread(ρ_w, k)) ≤ 1 − n!/((n − k)! n^k)` as integers over
/// the common denominator `2 C(n, k) n^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingCertificate {
    pub tv_numerator: u128,
    pub bound_numerator: u128,
    pub denominator: u128,
}

impl CouplingCertificate {
    pub fn holds(&self) -> bool {
        self.tv_numerator <= self.bound_numerator
    }

    pub fn tv(&self) -> f64 {
        self.tv_numerator as f64 / self.denominator as f64
    }

    pub fn bound(&self) -> f64 {
        self.bound_numerator as f64 / self.denominator as f64
    }
}

pub fn certify_coupling_bound(w: &Word, k: usize, m: usize) -> Result<CouplingCertificate> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::WordTooShort { word: n, required: k.max(1) });
    }
    let cnt = rss_counts(w, k, m)?;
    let (nv, nk) = spread_of_word_counts(w, k, m)?;
    let c = binomial(n as u64, k as u64).ok_or(Error::Overflow("binomial"))?;
    let (gap, _) = coupling_bound_i_exact(n, k).ok_or(Error::Overflow("coupling bound"))?;
    let mut tv: u128 = 0;
    for (&a, &b) in cnt.iter().zip(&nv) {
        let l = a.checked_mul(nk).ok_or(Error::Overflow("certificate"))?;
        let r = b.checked_mul(c).ok_or(Error::Overflow("certificate"))?;
        tv = tv.checked_add(l.abs_diff(r)).ok_or(Error::Overflow("certificate"))?;
    }
    let overflow = || Error::Overflow("certificate");
    Ok(CouplingCertificate {
        tv_numerator: tv,
        bound_numerator: gap.checked_mul(c).and_then(|x| x.checked_mul(2)).ok_or_else(overflow)?,
        denominator: c.checked_mul(nk).and_then(|x| x.checked_mul(2)).ok_or_else(overflow)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{rss_exact, tv_words};
    use crate::measures::{spread_exact, RhoSpec};
    use crate::rng::rng_for;
    use itertools::Itertools;

    #[test]
    fn bound_i_examples() {
        assert!((coupling_bound_i(10, 3, 1.0) - 0.28).abs() < 1e-15);
        assert_eq!(coupling_bound_i_exact(10, 3), Some((280, 1000)));
        for n in 1..50 {
            assert_eq!(coupling_bound_i(n, 1, 3.0), 0.0);
        }
        for k in 1..8 {
            let mut prev = f64::INFINITY;
            for n in k..200 {
                let b = coupling_bound_i(n, k, 1.0);
                assert!(b <= prev + 1e-15);
                prev = b;
            }
        }
        assert_eq!(coupling_bound_i(3, 5, 2.0), 2.0);
    }

    /// Exact `E|R_k/k − R_m/m|`: given `U_1 = u`, `R_k − 1 ~ Bin(k−1, u)` and
    /// `R_m − R_k ~ Bin(m−k, u)` independently; integrate out `u` with Beta integrals.
    fn bound_ii_exact(k: usize, m: usize) -> f64 {
        let (k, m) = (k.min(m), k.max(m));
        let mut total = 0.0;
        for (a, b) in (0..k).cartesian_product(0..=m - k) {
            let s = a + b;
            // C(k-1,a) C(m-k,b) B(s+1, m-s) = C(k-1,a) C(m-k,b) / (m C(m-1,s))
            let w = binomial((k - 1) as u64, a as u64).unwrap() as f64
                * binomial((m - k) as u64, b as u64).unwrap() as f64
                / (m as f64 * binomial((m - 1) as u64, s as u64).unwrap() as f64);
            total += w * ((a + 1) as f64 / k as f64 - (s + 1) as f64 / m as f64).abs();
        }
        total
    }

    #[test]
    fn bound_ii_matches_exact_values() {
        assert!((bound_ii_exact(1, 2) - 0.25).abs() < 1e-15);
        // brute force over the 2 orders of two uniforms
        let brute: f64 = [1.0f64, 2.0].iter().map(|r| (1.0 - r / 2.0).abs() / 2.0).sum();
        assert_eq!(brute, 0.25);
        assert_eq!(coupling_bound_ii(7, 7, 10, &mut rng_for(0)).mean, 0.0);
        for (k, m) in [(1, 2), (2, 5), (3, 4), (5, 10)] {
            let e = coupling_bound_ii(k, m, 200_000, &mut rng_for(k as u64 * 31 + m as u64));
            let exact = bound_ii_exact(k, m);
            assert!((e.mean - exact).abs() < 4.0 * e.std_err + 1e-12, "{k} {m}: {e:?} vs {exact}");
        }
    }

    #[test]
    fn bound_ii_shrinks() {
        let small = coupling_bound_ii(5, 10, 20_000, &mut rng_for(3)).mean;
        let large = coupling_bound_ii(50, 100, 20_000, &mut rng_for(4)).mean;
        assert!(large < small);
    }

    #[test]
    fn sample_spread_bound_values() {
        // k = 1: E|U − 1| = 1/2
        assert!((sample_spread_bound(1) - 0.5).abs() < 1e-12);
        // k = 2: (E|min − 1/2| + E|max − 1|) / 2, min ~ Beta(1,2), max ~ Beta(2,1)
        // ∫ |x − 1/2| 2(1 − x) dx = 1/4 and E|max − 1| = 1/3
        assert!((sample_spread_bound(2) - (0.25 + 1.0 / 3.0) / 2.0).abs() < 1e-12);
        let ks = [1, 2, 4, 8, 16, 64];
        for w in ks.windows(2) {
            assert!(sample_spread_bound(w[1]) < sample_spread_bound(w[0]));
        }
        // Monte-Carlo cross-check at k = 5
        let mut rng = rng_for(9);
        let reps = 100_000;
        let mut acc = 0.0;
        for _ in 0..reps {
            let mut u: Vec<f64> = (0..5).map(|_| rng.random()).collect();
            u.sort_by(f64::total_cmp);
            acc += u.iter().enumerate().map(|(i, x)| (x - (i + 1) as f64 / 5.0).abs()).sum::<f64>() / 5.0;
        }
        assert!((acc / reps as f64 - sample_spread_bound(5)).abs() < 2e-3);
    }

    #[test]
    fn certificate_agrees_with_float_tv() {
        let w = Word::from([0, 1]);
        // the bound is attained: tv(δ_01, Spread(ρ_01, 2)) = 1/2
        let c = certify_coupling_bound(&w, 2, 2).unwrap();
        assert!(c.holds());
        assert_eq!(c.tv_numerator, c.bound_numerator);
        assert!((c.bound() - 0.5).abs() < 1e-15);
        for w in (1..=6).flat_map(|n| Word::all(3, n)) {
            for k in 1..=w.len().min(3) {
                let c = certify_coupling_bound(&w, k, 3).unwrap();
                let rho = RhoSpec::smeared_word(&w, 3).unwrap();
                let tv = tv_words(&rss_exact(&w, k, 3).unwrap(), &spread_exact(&rho, k).unwrap()).unwrap();
                assert!((c.tv() - tv).abs() < 1e-12, "{w:?} {k}");
                assert!(c.holds());
                assert!((c.bound() - coupling_bound_i(w.len(), k, 1.0)).abs() < 1e-12);
            }
        }
        assert!(certify_coupling_bound(&w, 3, 2).is_err());
    }
}
