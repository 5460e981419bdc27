//! Exchangeable linear orders on `0..N` in four coupled forms: uniform values (U),
//! sorting permutations (S), eraser indices (η), and the comparison relation itself.
//!
//! Eraser values are 0-based: `eta[j]` is the slot erased at step `j + 1` and lies in `0..=j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::rng::{distinct_uniforms, rng_for};
use crate::word::{ps, Permutation};

/// Largest horizon for which the comparison relation is materialized.
pub const LINEAR_ORDER_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UPrefix(Vec<f64>);

impl UPrefix {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some(i) = u.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument(format!(
                "u[{i}] = {} is outside [0, 1]",
                u[i]
            )));
        }
        let p = ps(&u);
        for w in p.images().windows(2) {
            if u[w[0]] == u[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::DuplicateValue { first: a, second: b });
            }
        }
        Ok(Self(u))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }
}

/// Coherent sequence `S_1, ..., S_N`. Only `S_N` is stored: `S_n` is the one-line
/// notation of `S_N` restricted to the values `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SPrefix {
    last: Permutation,
}

impl SPrefix {
    pub fn from_last(last: Permutation) -> Self {
        Self { last }
    }

    /// Builds from an explicit sequence, checking the erasure coherence between neighbours.
    pub fn from_sequence(perms: &[Permutation]) -> Result<Self> {
        for (j, p) in perms.iter().enumerate() {
            if p.len() != j + 1 {
                return Err(Error::InvalidPermutation(format!(
                    "S_{} has length {}",
                    j + 1,
                    p.len()
                )));
            }
            if j > 0 {
                let restricted: Vec<usize> =
                    p.images().iter().copied().filter(|&v| v < j).collect();
                if restricted != perms[j - 1].images() {
                    return Err(Error::InvalidPermutation(format!(
                        "S_{} is not S_{} with its top value erased",
                        j,
                        j + 1
                    )));
                }
            }
        }
        let last = perms
            .last()
            .cloned()
            .unwrap_or_else(|| Permutation::identity(0));
        Ok(Self { last })
    }

    pub fn horizon(&self) -> usize {
        self.last.len()
    }

    pub fn last(&self) -> &Permutation {
        &self.last
    }

    /// `S_n` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> Result<Permutation> {
        if n == 0 || n > self.horizon() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.horizon(),
            });
        }
        let images: Vec<usize> = self
            .last
            .images()
            .iter()
            .copied()
            .filter(|&v| v < n)
            .collect();
        Ok(Permutation::from_images_unchecked(images))
    }

    /// `S_1, ..., S_N`.
    pub fn sequence(&self) -> Vec<Permutation> {
        (1..=self.horizon()).map(|n| self.get(n).unwrap()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct EraserPrefix(Vec<usize>);

impl EraserPrefix {
    pub fn new(eta: Vec<usize>) -> Result<Self> {
        if let Some(j) = eta.iter().enumerate().position(|(j, &e)| e > j) {
            return Err(Error::InvalidEraser(format!(
                "eta at step {} is {}, must be below {}",
                j + 1,
                eta[j],
                j + 1
            )));
        }
        Ok(Self(eta))
    }

    /// From the 1-based convention `η_n ∈ {1, ..., n}`.
    pub fn from_one_based(eta: &[usize]) -> Result<Self> {
        if eta.contains(&0) {
            return Err(Error::InvalidEraser("1-based eta contains 0".into()));
        }
        Self::new(eta.iter().map(|&e| e - 1).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&e| e + 1).collect()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    /// `η_n` (0-based value) for step `n` in `1..=N`.
    pub fn at(&self, n: usize) -> usize {
        self.0[n - 1]
    }

    /// Steps `n + 1, ..., N`.
    pub fn tail(&self, n: usize) -> &[usize] {
        &self.0[n..]
    }

    /// Every eraser prefix of horizon `n`, in lexicographic order.
    pub fn all(n: usize) -> Vec<EraserPrefix> {
        let mut out = vec![Vec::with_capacity(n)];
        for j in 0..n {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..=j).map(move |e| {
                        let mut q = p.clone();
                        q.push(e);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(EraserPrefix).collect()
    }
}

impl TryFrom<Vec<usize>> for EraserPrefix {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EraserPrefix> for Vec<usize> {
    fn from(e: EraserPrefix) -> Self {
        e.0
    }
}

/// Strict order on `0..N` (`N <= 64`); bit `j` of `rows[i]` is set iff `i` precedes `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearOrderPrefix {
    rows: Vec<u64>,
}

impl LinearOrderPrefix {
    pub fn from_s(s: &SPrefix) -> Result<Self> {
        let n = s.horizon();
        if n > LINEAR_ORDER_MAX {
            return Err(Error::TooLarge {
                what: "linear order horizon",
                size: n,
                limit: LINEAR_ORDER_MAX,
            });
        }
        let pos = s.last().inverse();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| pos.apply(i) < pos.apply(j))
                    .fold(0u64, |acc, j| acc | (1 << j))
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    /// The restriction to `0..n`, encoded as the permutation listing `0..n` in increasing order.
    pub fn restrict(&self, n: usize) -> Permutation {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if self.less(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        Permutation::from_images_unchecked(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderQuadruple {
    pub u: UPrefix,
    pub s: SPrefix,
    pub eta: EraserPrefix,
    /// Present only for horizons up to [`LINEAR_ORDER_MAX`].
    pub order: Option<LinearOrderPrefix>,
}

/// `η_n = #{k < n : rank_k < rank_n}` for distinct ranks.
pub(crate) fn eraser_from_ranks(ranks: &[usize]) -> Vec<usize> {
    let mut f = Fenwick::new(ranks.len());
    ranks
        .iter()
        .map(|&r| {
            let e = f.prefix(r) as usize;
            f.add(r, 1);
            e
        })
        .collect()
}

/// `η_n = #{k <= n : x_k <= x_n} - 1`, with ties counted; runs in `O(N log N)`.
pub fn eraser_from_values(x: &[f64]) -> EraserPrefix {
    let pos = ps(x).inverse();
    EraserPrefix(eraser_from_ranks(pos.images()))
}

pub fn u_to_s(u: &UPrefix) -> SPrefix {
    SPrefix { last: ps(u.values()) }
}

/// Validates distinctness and converts raw values.
pub fn values_to_s(u: &[f64]) -> Result<SPrefix> {
    UPrefix::new(u.to_vec()).map(|u| u_to_s(&u))
}

pub fn s_to_eraser(s: &SPrefix) -> EraserPrefix {
    let pos = s.last().inverse();
    EraserPrefix(eraser_from_ranks(pos.images()))
}

/// Rebuilds `S_N` by inserting value `n` into slot `η_n`; processed top-down with k-th free slot search.
pub fn eraser_to_s(eta: &EraserPrefix) -> SPrefix {
    let n = eta.horizon();
    let mut free = Fenwick::ones(n);
    let mut images = vec![0usize; n];
    for step in (0..n).rev() {
        let slot = free.kth(eta.0[step] as i64);
        images[slot] = step;
        free.add(slot, -1);
    }
    SPrefix {
        last: Permutation::from_images_unchecked(images),
    }
}

/// `S_N⁻¹(i) / N` with `S_N⁻¹(i)` taken as a 1-based rank; `i` is 0-based.
pub fn recover_u(eta: &EraserPrefix, i: usize) -> Result<f64> {
    let n = eta.horizon();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let s = eraser_to_s(eta);
    let pos = s.last().images().iter().position(|&v| v == i).unwrap();
    Ok((pos + 1) as f64 / n as f64)
}

/// Rank estimates `S_N⁻¹(i) / N` for every `i`.
pub fn recover_all_u(eta: &EraserPrefix) -> Vec<f64> {
    let n = eta.horizon() as f64;
    let s = eraser_to_s(eta);
    s.last()
        .inverse()
        .images()
        .iter()
        .map(|&p| (p + 1) as f64 / n)
        .collect()
}

/// Estimates of the order statistics of the first `n` values from `η_{n+1}, ..., η_N` alone.
///
/// The internal order of the first `n` is unknown from the tail; it is fixed to the identity,
/// which does not affect the sorted output.
pub fn order_statistics_from_tail(eta_tail: &[usize], n: usize) -> Result<Vec<f64>> {
    let big_n = n + eta_tail.len();
    let mut pos: Vec<usize> = (0..n).collect();
    for (j, &e) in eta_tail.iter().enumerate() {
        let step = n + j;
        if e > step {
            return Err(Error::InvalidEraser(format!(
                "eta at step {} is {}, must be below {}",
                step + 1,
                e,
                step + 1
            )));
        }
        for p in pos.iter_mut() {
            if *p >= e {
                *p += 1;
            }
        }
    }
    Ok(pos
        .into_iter()
        .map(|p| (p + 1) as f64 / big_n as f64)
        .collect())
}

pub fn quadruple_from_u(u: UPrefix) -> OrderQuadruple {
    let s = u_to_s(&u);
    let eta = s_to_eraser(&s);
    let order = LinearOrderPrefix::from_s(&s).ok();
    OrderQuadruple { u, s, eta, order }
}

pub fn simulate_quadruple_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OrderQuadruple {
    quadruple_from_u(UPrefix(distinct_uniforms(n, rng)))
}

pub fn simulate_quadruple(n: usize, seed: u64) -> Result<OrderQuadruple> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(simulate_quadruple_with(n, &mut rng_for(seed)))
}
