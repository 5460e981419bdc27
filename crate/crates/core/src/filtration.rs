//! Innovation relabelling and reconstruction of words from eraser tails.
//!
//! A single uniform `V` carries both the letter and the position of a draw from ρ:
//! the letter is the block of `[0, 1)` containing `V` (block `i` has length `α_i`) and
//! the position is the inverse quantile of the letter's position law. Ranking the `V`s
//! gives a second eraser process `η*` with `η*_n = π_{W_n}(η_n)`.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::rss_exact;
use crate::measures::{set_of_word, spread_exact, PointSet2D, RhoSpec};
use crate::order::{eraser_from_values, order_statistics_from_tail, EraserPrefix, UPrefix};
use crate::rng::{rng_for, rng_for_stream};
use crate::sim::GewpTrajectory;
use crate::word::{ios, Letter, Permutation, Word};

/// `π_w(i) = #{j : w_j < w_i} + #{j < i : w_j = w_i}`: the slot of `w_i` in the stably
/// sorted word.
pub fn pi_of_word(w: &Word) -> Result<Permutation> {
    if w.is_empty() {
        return Err(Error::WordTooShort { word: 0, required: 1 });
    }
    let m = w.iter().map(|&l| l as usize + 1).max().unwrap_or(1);
    let counts = w.letter_counts(m);
    let mut next = vec![0usize; m];
    for l in 1..m {
        next[l] = next[l - 1] + counts[l - 1];
    }
    let images = w
        .iter()
        .map(|&l| {
            let slot = next[l as usize];
            next[l as usize] += 1;
            slot
        })
        .collect();
    Ok(Permutation::from_images_unchecked(images))
}

/// `π_w(η)` for a 0-based slot `η`.
pub fn relabel_innovation(w: &Word, eta: usize) -> Result<usize> {
    if eta >= w.len() {
        return Err(Error::IndexOutOfRange { index: eta, len: w.len() });
    }
    Ok(pi_of_word(w)?.apply(eta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Block {
    letter: Letter,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcRepresentation {
    alpha: Vec<f64>,
    blocks: Vec<Block>,
    rho: RhoSpec,
}

/// Block map `f` and inverse-quantile position map `c`; letters of zero mass get no block.
pub fn build_fc(rho: &RhoSpec) -> FcRepresentation {
    let alpha = rho.alpha();
    let mut blocks = Vec::new();
    let mut lo = 0.0;
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            blocks.push(Block { letter: i as Letter, lo, hi: lo + a });
            lo += a;
        }
    }
    FcRepresentation { alpha, blocks, rho: rho.clone() }
}

impl FcRepresentation {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn rho(&self) -> &RhoSpec {
        &self.rho
    }

    fn block(&self, v: f64) -> &Block {
        let q = self.blocks.partition_point(|b| b.hi <= v);
        &self.blocks[q.min(self.blocks.len() - 1)]
    }

    /// Left ends of the nonempty blocks with their letters.
    pub fn block_starts(&self) -> Vec<(Letter, f64)> {
        self.blocks.iter().map(|b| (b.letter, b.lo)).collect()
    }

    pub fn f(&self, v: f64) -> Letter {
        self.block(v).letter
    }

    pub fn c(&self, v: f64) -> f64 {
        let b = self.block(v);
        self.rho.letter_quantile(b.letter as usize, (v - b.lo).max(0.0))
    }

    pub fn map(&self, v: f64) -> (Letter, f64) {
        let b = self.block(v);
        (b.letter, self.rho.letter_quantile(b.letter as usize, (v - b.lo).max(0.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualInnovations {
    pub eta: EraserPrefix,
    pub eta_star: EraserPrefix,
    pub v: UPrefix,
}

impl DualInnovations {
    /// Checks `η*_n = π_{W_n}(η_n)` for every `n`.
    pub fn check_identity(&self, t: &GewpTrajectory) -> Result<()> {
        if t.horizon() != self.eta.horizon() || t.eta() != &self.eta {
            return Err(Error::InvariantViolation { invariant: "shared eraser process", step: 0 });
        }
        for n in 1..=t.horizon() {
            if relabel_innovation(&t.word(n)?, self.eta.at(n))? != self.eta_star.at(n) {
                return Err(Error::InvariantViolation { invariant: "relabelled innovation", step: n });
            }
        }
        Ok(())
    }
}

/// Draws distinct `V`s whose images `c(V)` are also distinct.
fn draw_dual<R: Rng + ?Sized>(fc: &FcRepresentation, n: usize, rng: &mut R) -> (Vec<f64>, Vec<Letter>, Vec<f64>) {
    let mut seen_v = HashSet::with_capacity(n);
    let mut seen_u = HashSet::with_capacity(n);
    let (mut v, mut y, mut u) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    while v.len() < n {
        let x: f64 = rng.random();
        let (l, p) = fc.map(x);
        if seen_v.contains(&x.to_bits()) || seen_u.contains(&p.to_bits()) {
            continue;
        }
        seen_v.insert(x.to_bits());
        seen_u.insert(p.to_bits());
        v.push(x);
        y.push(l);
        u.push(p);
    }
    (v, y, u)
}

/// Simulates `V` iid uniform, sets `(Y, U) = (f(V), c(V))`, and returns the trajectory
/// with both eraser processes.
pub fn simulate_dual(rho: &RhoSpec, n: usize, seed: u64) -> Result<(GewpTrajectory, DualInnovations)> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let fc = build_fc(rho);
    let (v, y, u) = draw_dual(&fc, n, &mut rng_for(seed));
    let t = GewpTrajectory::from_driving(rho.alphabet_size(), y, u, seed)?;
    let dual = DualInnovations {
        eta: t.eta().clone(),
        eta_star: eraser_from_values(&v),
        v: UPrefix::new(v)?,
    };
    Ok((t, dual))
}

/// `ios(f(v), c(v))` for sorted `v`.
pub fn reconstruct_word_from_os_v(v_sorted: &[f64], fc: &FcRepresentation) -> Result<Word> {
    if v_sorted.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::InvalidArgument("values must be sorted".into()));
    }
    let (letters, positions): (Vec<Letter>, Vec<f64>) = v_sorted.iter().map(|&x| fc.map(x)).unzip();
    ios(&Word(letters), &positions)
}

/// Reconstructs `W_n` from `η*_{n+1}, ..., η*_N` via rank estimates of the sorted `V`s.
pub fn reconstruct_from_eta_star_tail(eta_tail: &[usize], n: usize, fc: &FcRepresentation) -> Result<Word> {
    reconstruct_word_from_os_v(&order_statistics_from_tail(eta_tail, n)?, fc)
}

/// Reconstructs `W_n = (f(U_{1:n}), ..., f(U_{n:n}))` from `η_{n+1}, ..., η_N` when ρ is
/// the law of `(f(U), U)`.
pub fn reconstruct_word_threshold(eta_tail: &[usize], n: usize, rho: &RhoSpec) -> Result<Word> {
    if !rho.is_deterministic_letter() {
        return Err(Error::InvalidRho("letters are not a function of the position".into()));
    }
    let u = order_statistics_from_tail(eta_tail, n)?;
    Ok(Word(u.iter().map(|&x| rho.letter_function(x).unwrap()).collect()))
}

/// The same estimator for any ρ, with the most probable letter at each estimated position.
pub fn reconstruct_word_map(eta_tail: &[usize], n: usize, rho: &RhoSpec) -> Result<Word> {
    let u = order_statistics_from_tail(eta_tail, n)?;
    Ok(Word(u.iter().map(|&x| rho.map_letter(x)).collect()))
}

/// Successes out of replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRate {
    pub matches: u64,
    pub reps: u64,
}

impl MatchRate {
    pub fn rate(&self) -> f64 {
        self.matches as f64 / self.reps as f64
    }
}

fn count_matches(reps: usize, trial: impl Fn(u64) -> Result<bool> + Sync + Send) -> Result<MatchRate> {
    let hits: Vec<bool> = (0..reps as u64).into_par_iter().map(&trial).collect::<Result<_>>()?;
    Ok(MatchRate {
        matches: hits.iter().filter(|&&h| h).count() as u64,
        reps: reps as u64,
    })
}

/// How often `W_n` is recovered exactly from the `η*`-tail of horizon `big_n`;
/// replicate `r` uses stream `r` of `seed`.
pub fn eta_star_match_rate(rho: &RhoSpec, n: usize, big_n: usize, reps: usize, seed: u64) -> Result<MatchRate> {
    if n == 0 || big_n < n {
        return Err(Error::InvalidArgument("need 1 <= n <= N".into()));
    }
    let fc = build_fc(rho);
    count_matches(reps, |r| {
        let (v, y, u) = draw_dual(&fc, big_n, &mut rng_for_stream(seed, r));
        let truth = ios(&Word(y[..n].to_vec()), &u[..n])?;
        let eta_star = eraser_from_values(&v);
        Ok(reconstruct_from_eta_star_tail(eta_star.tail(n), n, &fc)? == truth)
    })
}

/// How often `W_n` is recovered exactly from the `η`-tail alone, using the letter function
/// of ρ when it has one and the most probable letter otherwise.
pub fn eta_match_rate(rho: &RhoSpec, n: usize, big_n: usize, reps: usize, seed: u64) -> Result<MatchRate> {
    if n == 0 || big_n < n {
        return Err(Error::InvalidArgument("need 1 <= n <= N".into()));
    }
    let deterministic = rho.is_deterministic_letter();
    count_matches(reps, |r| {
        let mut rng = rng_for_stream(seed, r);
        let t = crate::sim::simulate_gewp_with(rho, big_n, seed, &mut rng)?;
        let truth = t.word(n)?;
        let tail = t.eta().tail(n);
        let guess = if deterministic {
            reconstruct_word_threshold(tail, n, rho)?
        } else {
            reconstruct_word_map(tail, n, rho)?
        };
        Ok(guess == truth)
    })
}

/// How often an independent draw of `W_n` equals the most probable word of Spread(ρ, n):
/// the best guess that ignores the innovations.
pub fn marginal_guess_rate(rho: &RhoSpec, n: usize, reps: usize, seed: u64) -> Result<MatchRate> {
    let (mode, _) = spread_exact(rho, n)?.mode();
    count_matches(reps, |r| {
        let w = crate::measures::spread::spread_draw(rho, n, &mut rng_for_stream(seed, r));
        Ok(w == mode)
    })
}

/// One checkpoint of the lattice-path picture with rank anchors for the first `n_mark` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixFrame {
    pub n: usize,
    pub set: PointSet2D,
    /// `S_n⁻¹(i) / n` for `i < n_mark`.
    pub u_anchors: Vec<f64>,
    /// The same ranks on the `V` side.
    pub v_anchors: Vec<f64>,
    pub u_true: Vec<f64>,
    pub v_true: Vec<f64>,
}

fn rank_anchors(x: &[f64], n: usize, n_mark: usize) -> Vec<f64> {
    (0..n_mark)
        .map(|i| (x[..n].iter().filter(|&&y| y < x[i]).count() + 1) as f64 / n as f64)
        .collect()
}

pub fn appendix_plot_data(
    t: &GewpTrajectory,
    dual: &DualInnovations,
    n_mark: usize,
    checkpoints: &[usize],
) -> Result<Vec<AppendixFrame>> {
    if t.alphabet_size() != 2 {
        return Err(Error::NotBinary { size: t.alphabet_size() });
    }
    let u = t.positions();
    let v = dual.v.values();
    checkpoints
        .iter()
        .map(|&n| {
            if n < n_mark {
                return Err(Error::WordTooShort { word: n, required: n_mark });
            }
            Ok(AppendixFrame {
                n,
                set: set_of_word(&t.word(n)?)?,
                u_anchors: rank_anchors(u, n, n_mark),
                v_anchors: rank_anchors(v, n, n_mark),
                u_true: u[..n_mark].to_vec(),
                v_true: v[..n_mark].to_vec(),
            })
        })
        .collect()
}

/// `tv(RSS(W_n, k), Spread(ρ, k))` helper shared by reports.
pub fn rss_gap(w: &Word, rho: &RhoSpec, k: usize) -> Result<f64> {
    crate::kernels::tv_words(&rss_exact(w, k, rho.alphabet_size())?, &spread_exact(rho, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi_square_uniform, ks_test};
    use crate::word::os;
    use proptest::prelude::*;
    use rand::Rng;

    fn parametric() -> Vec<RhoSpec> {
        vec![
            RhoSpec::product(vec![0.5, 0.5]).unwrap(),
            RhoSpec::product(vec![0.2, 0.3, 0.5]).unwrap(),
            RhoSpec::triangular(),
            RhoSpec::threshold(3, vec![0.3, 0.6], vec![2, 0, 2]).unwrap(),
        ]
    }

    #[test]
    fn pi_examples() {
        // b b a c a b c b a
        let w = Word::from([1, 1, 0, 2, 0, 1, 2, 1, 0]);
        let pi = pi_of_word(&w).unwrap();
        let one_based: Vec<usize> = pi.images().iter().map(|x| x + 1).collect();
        assert_eq!(one_based, vec![4, 5, 1, 8, 2, 6, 9, 7, 3]);
        assert_eq!(relabel_innovation(&w, 3).unwrap() + 1, 8);
        assert!(pi_of_word(&Word(vec![2; 5])).unwrap().is_identity());
        assert!(pi_of_word(&Word::from([0, 0, 1, 2, 2])).unwrap().is_identity());
        assert!(relabel_innovation(&w, 9).is_err());
    }

    #[test]
    fn relabelled_innovation_is_uniform() {
        let w = Word::from([1, 1, 0, 2, 0, 1, 2, 1, 0]);
        let mut rng = rng_for(1);
        let mut counts = vec![0u64; 9];
        for _ in 0..100_000 {
            counts[relabel_innovation(&w, rng.random_range(0..9)).unwrap()] += 1;
        }
        assert!(chi_square_uniform(&counts).unwrap().p_value > 0.001);
    }

    proptest! {
        #[test]
        fn pi_sorts_the_word(letters in proptest::collection::vec(0u16..4, 1..30)) {
            let w = Word(letters);
            let pi = pi_of_word(&w).unwrap();
            let mut sorted = vec![0; w.len()];
            for (i, &l) in w.iter().enumerate() {
                sorted[pi.apply(i)] = l;
            }
            let mut expect = w.0.clone();
            expect.sort();
            prop_assert_eq!(sorted, expect);
            // the inverse is increasing on each letter block
            let inv = pi.inverse();
            for p in inv.images().windows(2) {
                if w[p[0]] == w[p[1]] {
                    prop_assert!(p[0] < p[1]);
                }
            }
        }
    }

    #[test]
    fn fc_product_example() {
        let fc = build_fc(&RhoSpec::product(vec![0.5, 0.5]).unwrap());
        assert_eq!(fc.alpha(), &[0.5, 0.5]);
        assert_eq!(fc.map(0.25), (0, 0.5));
        let (l, p) = fc.map(0.8);
        assert_eq!(l, 1);
        assert!((p - 0.6).abs() < 1e-12);
    }

    #[test]
    fn fc_blocks_follow_alpha_and_skip_empty_letters() {
        let rho = RhoSpec::threshold(4, vec![0.25, 0.5], vec![3, 0, 3]).unwrap();
        let fc = build_fc(&rho);
        assert_eq!(fc.block_starts(), vec![(0, 0.0), (3, 0.25)]);
        assert_eq!(fc.f(0.1), 0);
        assert_eq!(fc.f(0.25), 3);
        assert_eq!(fc.f(0.9999), 3);
    }

    #[test]
    fn fc_threshold_pushforward_matches_on_grid() {
        let rho = RhoSpec::threshold(2, vec![0.3, 0.55], vec![1, 0, 1]).unwrap();
        let fc = build_fc(&rho);
        let grid: Vec<(Letter, f64)> = (0..1024).map(|j| fc.map((j as f64 + 0.5) / 1024.0)).collect();
        for &(l, u) in &grid {
            assert_eq!(rho.letter_function(u), Some(l));
        }
        for j in 0..=64 {
            let t = j as f64 / 64.0;
            for i in 0..2 {
                let pulled = grid.iter().filter(|&&(l, u)| l as usize == i && u <= t).count() as f64 / 1024.0;
                assert!((pulled - rho.letter_cdf(i, t)).abs() <= 1.0 / 1024.0);
            }
        }
    }

    #[test]
    fn fc_pushforward_passes_ks_per_letter() {
        for rho in parametric() {
            let fc = build_fc(&rho);
            let mut rng = rng_for(11);
            let mut by_letter: Vec<Vec<f64>> = vec![Vec::new(); rho.alphabet_size()];
            for _ in 0..100_000 {
                let (l, u) = fc.map(rng.random());
                by_letter[l as usize].push(u);
            }
            let alpha = rho.alpha();
            for (i, xs) in by_letter.iter().enumerate() {
                if alpha[i] == 0.0 {
                    assert!(xs.is_empty());
                    continue;
                }
                let share = xs.len() as f64 / 1e5;
                assert!((share - alpha[i]).abs() < 4.0 * (alpha[i] * (1.0 - alpha[i]) / 1e5).sqrt() + 1e-12);
                let r = ks_test(xs, |t| rho.letter_cdf(i, t) / alpha[i]).unwrap();
                assert!(r.p_value > 0.001, "{} letter {i}: {r:?}", rho.kind_name());
            }
        }
    }

    #[test]
    fn dual_identity_and_reconstruction() {
        for rho in parametric() {
            for seed in 0..5 {
                let (t, dual) = simulate_dual(&rho, 500, seed).unwrap();
                t.check_invariants().unwrap();
                dual.check_identity(&t).unwrap();
                let fc = build_fc(&rho);
                for n in [1, 2, 7, 100, 500] {
                    let w = reconstruct_word_from_os_v(&os(&dual.v.values()[..n]), &fc).unwrap();
                    assert_eq!(w, t.word(n).unwrap());
                }
            }
        }
    }

    #[test]
    fn product_eta_and_eta_star_differ() {
        let (_, dual) = simulate_dual(&RhoSpec::product(vec![0.5, 0.5]).unwrap(), 200, 3).unwrap();
        let differ = (1..=200).filter(|&n| dual.eta.at(n) != dual.eta_star.at(n)).count();
        assert!(differ > 100);
    }

    #[test]
    fn both_innovations_are_uniform() {
        let rho = RhoSpec::triangular();
        let n = 5;
        let (mut a, mut b) = (vec![0u64; n], vec![0u64; n]);
        for seed in 0..20_000 {
            let (_, dual) = simulate_dual(&rho, n, seed).unwrap();
            a[dual.eta.at(n)] += 1;
            b[dual.eta_star.at(n)] += 1;
        }
        assert!(chi_square_uniform(&a).unwrap().p_value > 0.001);
        assert!(chi_square_uniform(&b).unwrap().p_value > 0.001);
    }

    #[test]
    fn reconstruction_ignores_input_order() {
        let fc = build_fc(&RhoSpec::triangular());
        let mut rng = rng_for(2);
        let mut v: Vec<f64> = (0..9).map(|_| rng.random()).collect();
        let sorted = os(&v);
        let w = reconstruct_word_from_os_v(&sorted, &fc).unwrap();
        v.reverse();
        assert_eq!(reconstruct_word_from_os_v(&os(&v), &fc).unwrap(), w);
        assert!(reconstruct_word_from_os_v(&v, &fc).is_err() || v == sorted);
        let single = reconstruct_word_from_os_v(&[0.7], &fc).unwrap();
        assert_eq!(single, Word(vec![fc.f(0.7)]));
    }

    #[test]
    fn threshold_reconstruction_rates() {
        let constant = RhoSpec::threshold(2, vec![], vec![1]).unwrap();
        assert_eq!(eta_match_rate(&constant, 5, 200, 50, 1).unwrap().rate(), 1.0);
        let half = RhoSpec::threshold(2, vec![0.5], vec![0, 1]).unwrap();
        assert!(eta_match_rate(&half, 5, 20_000, 200, 2).unwrap().rate() > 0.9);
        assert!(reconstruct_word_threshold(&[0, 0], 1, &RhoSpec::triangular()).is_err());
    }

    #[test]
    fn eta_star_rate_grows() {
        let rho = RhoSpec::product(vec![0.5, 0.5]).unwrap();
        let lo = eta_star_match_rate(&rho, 5, 100, 300, 4).unwrap().rate();
        let hi = eta_star_match_rate(&rho, 5, 20_000, 300, 4).unwrap().rate();
        assert!(hi > lo, "{lo} {hi}");
        assert!(hi > 0.9);
    }

    #[test]
    fn appendix_frames() {
        let rho = RhoSpec::product(vec![0.5, 0.5]).unwrap();
        let (t, dual) = simulate_dual(&rho, 4000, 6).unwrap();
        let frames = appendix_plot_data(&t, &dual, 5, &[5, 50, 4000]).unwrap();
        let err = |f: &AppendixFrame| {
            f.u_anchors
                .iter()
                .zip(&f.u_true)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        for f in &frames {
            assert_eq!(f.u_anchors.len(), 5);
            assert_eq!(f.v_anchors.len(), 5);
            assert_eq!(f.set.len(), f.n + 1);
        }
        assert!(err(&frames[2]) < err(&frames[0]));
        let three = RhoSpec::product(vec![0.2, 0.3, 0.5]).unwrap();
        let (t3, d3) = simulate_dual(&three, 10, 1).unwrap();
        assert!(appendix_plot_data(&t3, &d3, 2, &[10]).is_err());
    }
}
