//! Words over a finite alphabet, erasure, and the sorting statistics `ps`, `os`, `ios`.
//!
//! Letters and permutation images are 0-based throughout: a word over an
//! alphabet of `m` symbols holds indices in `0..m`, and a permutation of
//! length `n` maps `0..n` onto itself.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Letter = u16;

/// Ordered list of distinct symbol names. Symbol `i` is letter `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("alphabet must be nonempty".into()));
        }
        if symbols.len() > Letter::MAX as usize {
            return Err(Error::TooLarge {
                what: "alphabet",
                size: symbols.len(),
                limit: Letter::MAX as usize,
            });
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!(
                    "symbol {s:?} must be a nonempty token without whitespace"
                )));
            }
            if let Some(j) = symbols[..i].iter().position(|t| t == s) {
                return Err(Error::DuplicateValue { first: j, second: i });
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet with symbols `1`, `2`, ..., `m`.
    pub fn numbered(m: usize) -> Result<Self> {
        Self::new((1..=m).map(|i| i.to_string()))
    }

    /// The alphabet `{0, 1}` used by the set-of-word geometry.
    pub fn binary() -> Self {
        Self {
            symbols: vec!["0".into(), "1".into()],
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, letter: Letter) -> Option<&str> {
        self.symbols.get(letter as usize).map(String::as_str)
    }

    pub fn letter(&self, token: &str) -> Result<Letter> {
        self.symbols
            .iter()
            .position(|s| s == token)
            .map(|i| i as Letter)
            .ok_or_else(|| Error::UnknownToken {
                token: token.to_string(),
            })
    }

    /// Parses whitespace-separated tokens into a word.
    pub fn parse_word(&self, line: &str) -> Result<Word> {
        line.split_whitespace()
            .map(|t| self.letter(t))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.iter()
            .map(|&l| self.symbol(l).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn check_alphabet(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l as usize >= m) {
            Some(&l) => Err(Error::LetterOutOfRange {
                letter: l as usize,
                size: m,
            }),
            None => Ok(()),
        }
    }

    /// Position of this word in the base-`m` enumeration of `A^k`, first letter most significant.
    pub fn dense_index(&self, m: usize) -> usize {
        self.0.iter().fold(0usize, |acc, &l| acc * m + l as usize)
    }

    pub fn from_dense_index(mut index: usize, m: usize, k: usize) -> Self {
        let mut letters = vec![0; k];
        for slot in letters.iter_mut().rev() {
            *slot = (index % m) as Letter;
            index /= m;
        }
        Self(letters)
    }

    /// All words of length `k` over `m` letters in dense-index order.
    pub fn all(m: usize, k: usize) -> impl Iterator<Item = Word> {
        let total = m.checked_pow(k as u32).expect("m^k overflows usize");
        (0..total).map(move |i| Word::from_dense_index(i, m, k))
    }

    /// Number of occurrences of each letter `0..m`.
    pub fn letter_counts(&self, m: usize) -> Vec<usize> {
        let mut c = vec![0; m];
        for &l in &self.0 {
            c[l as usize] += 1;
        }
        c
    }
}

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(v: [Letter; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A bijection of `0..n` in one-line notation: `images[i] = π(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![usize::MAX; n];
        for (i, &v) in images.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} at position {i} is outside 0..{n}"
                )));
            }
            if seen[v] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} repeated at positions {} and {i}",
                    seen[v]
                )));
            }
            seen[v] = i;
        }
        Ok(Self { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Self { images }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Reorders `items` as `(items[π(0)], ..., items[π(n-1)])`.
    pub fn gather<T: Copy>(&self, items: &[T]) -> Result<Vec<T>> {
        if items.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: items.len(),
                right: self.len(),
            });
        }
        Ok(self.images.iter().map(|&j| items[j]).collect())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// Removes the letter at 0-based index `i`.
pub fn erase(w: &Word, i: usize) -> Result<Word> {
    if i >= w.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: w.len(),
        });
    }
    let mut out = Vec::with_capacity(w.len() - 1);
    out.extend_from_slice(&w[..i]);
    out.extend_from_slice(&w[i + 1..]);
    Ok(Word(out))
}

/// Stable sorting permutation: `x[π(0)] <= x[π(1)] <= ...`, ties kept in index order.
pub fn ps(x: &[f64]) -> Permutation {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    Permutation { images: idx }
}

/// Order statistics of `x`.
pub fn os(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Induced order statistics: the letters of `y` reordered by increasing `x`.
pub fn ios(y: &Word, x: &[f64]) -> Result<Word> {
    ps(x).gather(y).map(Word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    const A: Letter = 0;
    const B: Letter = 1;
    const C: Letter = 2;

    fn all_perms(n: usize) -> Vec<Permutation> {
        (0..n)
            .permutations(n)
            .map(|p| Permutation::new(p).unwrap())
            .collect()
    }

    #[test]
    fn erase_examples() {
        assert_eq!(erase(&Word::from([A, B, C]), 1).unwrap(), Word::from([A, C]));
        assert_eq!(erase(&Word::from([A]), 0).unwrap(), Word::empty());
        let w = Word::from([B, B, A, C, A, B, C, B, A]);
        assert_eq!(
            erase(&w, 3).unwrap(),
            Word::from([B, B, A, A, B, C, B, A])
        );
        assert!(matches!(
            erase(&w, 9),
            Err(Error::IndexOutOfRange { index: 9, len: 9 })
        ));
        assert!(erase(&Word::empty(), 0).is_err());
    }

    #[test]
    fn erase_exhaustive_binary() {
        for n in 1..=6 {
            for w in Word::all(2, n) {
                for i in 0..n {
                    let e = erase(&w, i).unwrap();
                    assert_eq!(e.len(), n - 1);
                    for j in 0..n - 1 {
                        let src = if j < i { j } else { j + 1 };
                        assert_eq!(e[j], w[src]);
                    }
                }
            }
        }
    }

    #[test]
    fn ps_examples() {
        assert_eq!(ps(&[0.3, 0.1, 0.2]).images(), &[1, 2, 0]);
        assert!(ps(&[0.5, 0.5]).is_identity());
        assert_eq!(ps(&[0.9, 0.1, 0.9, 0.1]).images(), &[1, 3, 0, 2]);
        assert!(ps(&[]).is_empty());
    }

    #[test]
    fn os_examples() {
        assert_eq!(os(&[0.3, 0.1, 0.2]), vec![0.1, 0.2, 0.3]);
        assert!(os(&[]).is_empty());
        assert_eq!(os(&[0.5, 0.5, 0.2]), vec![0.2, 0.5, 0.5]);
    }

    #[test]
    fn ios_examples() {
        let w = Word::from([A, B, C]);
        assert_eq!(ios(&w, &[0.3, 0.1, 0.2]).unwrap(), Word::from([B, C, A]));
        assert_eq!(ios(&w, &[0.1, 0.2, 0.3]).unwrap(), w);
        assert_eq!(
            ios(&Word::from([A, B, A, B]), &[0.9, 0.1, 0.9, 0.1]).unwrap(),
            Word::from([B, B, A, A])
        );
        assert!(matches!(
            ios(&w, &[0.1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ps_of_permuted_input_exhaustive() {
        // distinct x: ps(x∘τ) = τ⁻¹∘ps(x), and ios(y∘τ, x∘τ) = ios(y, x)
        for n in 0..=5 {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0).collect();
            let y = Word((0..n).map(|i| (i % 3) as Letter).collect());
            let p = ps(&x);
            for tau in all_perms(n) {
                let xt = tau.gather(&x).unwrap();
                let yt = Word(tau.gather(&y).unwrap());
                assert_eq!(ps(&xt), tau.inverse().compose(&p).unwrap());
                assert_eq!(ios(&yt, &xt).unwrap(), ios(&y, &x).unwrap());
            }
        }
    }

    #[test]
    fn ps_stability_exhaustive_over_tie_patterns() {
        for n in 1..=5usize {
            for pattern in Word::all(3, n) {
                let x: Vec<f64> = pattern.iter().map(|&l| l as f64 / 2.0).collect();
                let p = ps(&x);
                let inv = p.inverse();
                for i in 0..n {
                    for j in i + 1..n {
                        if x[i] == x[j] {
                            assert!(inv.apply(i) < inv.apply(j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alphabet_parsing() {
        let a = Alphabet::new(["a", "b", "c"]).unwrap();
        assert_eq!(a.parse_word("a b a a b").unwrap(), Word::from([A, B, A, A, B]));
        assert_eq!(a.parse_word("").unwrap(), Word::empty());
        assert_eq!(
            a.parse_word("a x").unwrap_err(),
            Error::UnknownToken { token: "x".into() }
        );
        assert_eq!(a.format_word(&Word::from([C, A])), "c a");
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert_eq!(Alphabet::numbered(3).unwrap().letter("2").unwrap(), 1);
    }

    #[test]
    fn dense_index_roundtrip() {
        for (i, w) in Word::all(3, 4).enumerate() {
            assert_eq!(w.dense_index(3), i);
            assert_eq!(Word::from_dense_index(i, 3, 4), w);
        }
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![2, 0]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert!(p.compose(&p.inverse()).unwrap().is_identity());
        assert!(p.inverse().compose(&p).unwrap().is_identity());
    }

    proptest! {
        #[test]
        fn os_is_sorted_ios_of_identity(x in prop::collection::vec(0.0f64..=1.0, 0..40)) {
            let p = ps(&x);
            let sorted = p.gather(&x).unwrap();
            prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(&sorted, &os(&x));
            let labels = Word((0..x.len() as Letter).collect());
            let induced = ios(&labels, &x).unwrap();
            let via_labels: Vec<f64> = induced.iter().map(|&l| x[l as usize]).collect();
            prop_assert!(via_labels.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn perm_inverse_is_two_sided(n in 0usize..30, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut rng);
            let p = Permutation::new(v).unwrap();
            prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        }
    }
}
