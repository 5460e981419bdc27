//! Lattice-path pictures of binary words and of binary directing measures.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RhoSpec;
use crate::word::Word;

/// Default resolution of [`set_of_rho`].
pub const SET_OF_RHO_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet2D {
    points: Vec<(f64, f64)>,
}

impl PointSet2D {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point set must be nonempty".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["x", "y"]).map_err(io)?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()]).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// The `n + 1` points `((#1 in w[..i]) / n, (#0 in w[..i]) / n)` for `i = 0..=n`.
pub fn set_of_word(w: &Word) -> Result<PointSet2D> {
    if w.is_empty() {
        return Err(Error::WordTooShort { word: 0, required: 1 });
    }
    if let Some(&l) = w.iter().find(|&&l| l > 1) {
        return Err(Error::NotBinary { size: l as usize + 1 });
    }
    let n = w.len() as f64;
    let mut ones = 0usize;
    let mut pts = Vec::with_capacity(w.len() + 1);
    pts.push((0.0, 0.0));
    for (i, &l) in w.iter().enumerate() {
        ones += l as usize;
        pts.push((ones as f64 / n, (i + 1 - ones) as f64 / n));
    }
    Ok(PointSet2D { points: pts })
}

/// `(ρ({0} × [0, t]), ρ({1} × [0, t]))` at `t = j / (grid − 1)`.
pub fn set_of_rho(rho: &RhoSpec, grid: usize) -> Result<PointSet2D> {
    if rho.alphabet_size() != 2 {
        return Err(Error::NotBinary { size: rho.alphabet_size() });
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let pts = (0..grid)
        .map(|j| {
            let t = j as f64 / (grid - 1) as f64;
            (rho.letter_cdf(0, t), rho.letter_cdf(1, t))
        })
        .collect();
    Ok(PointSet2D { points: pts })
}

/// `set(ρ)` in the axes of [`set_of_word`]: letter-1 mass first, letter-0 mass second.
/// The two displayed definitions order their coordinates oppositely; convergence of
/// `set(W_n)` is measured against this version.
pub fn set_of_rho_word_axes(rho: &RhoSpec, grid: usize) -> Result<PointSet2D> {
    let s = set_of_rho(rho, grid)?;
    Ok(PointSet2D {
        points: s.points.into_iter().map(|(x, y)| (y, x)).collect(),
    })
}

/// Hausdorff distance between `set(w)` and `set(ρ)` in common axes.
pub fn hausdorff_word_rho(w: &Word, rho: &RhoSpec, grid: usize) -> Result<f64> {
    Ok(hausdorff(&set_of_word(w)?, &set_of_rho_word_axes(rho, grid)?))
}

fn directed(p: &PointSet2D, q: &PointSet2D) -> f64 {
    p.points
        .iter()
        .map(|&(x, y)| {
            q.points
                .iter()
                .map(|&(a, b)| (x - a).powi(2) + (y - b).powi(2))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// Euclidean Hausdorff distance.
pub fn hausdorff(p: &PointSet2D, q: &PointSet2D) -> f64 {
    directed(p, q).max(directed(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn set_of_word_examples() {
        let s = set_of_word(&Word::from([1, 0])).unwrap();
        assert_eq!(s.points(), &[(0.0, 0.0), (0.5, 0.0), (0.5, 0.5)]);
        let s = set_of_word(&Word(vec![1; 4])).unwrap();
        assert!(s.points().iter().enumerate().all(|(i, &p)| p == (i as f64 / 4.0, 0.0)));
        assert_eq!(set_of_word(&Word::from([0, 1, 1, 0, 1])).unwrap().len(), 6);
        assert!(set_of_word(&Word::from([0, 2])).is_err());
    }

    #[test]
    fn set_of_rho_examples() {
        let prod = set_of_rho(&RhoSpec::product(vec![0.5, 0.5]).unwrap(), SET_OF_RHO_POINTS).unwrap();
        for &(x, y) in prod.points() {
            assert!((x - y).abs() < 1e-15);
        }
        let tri = set_of_rho(&RhoSpec::triangular(), SET_OF_RHO_POINTS).unwrap();
        for (j, &(x, y)) in tri.points().iter().enumerate() {
            let t = j as f64 / 511.0;
            assert!((x - (t - t * t / 2.0)).abs() < 1e-15);
            assert!((y - t * t / 2.0).abs() < 1e-15);
        }
        let r = RhoSpec::threshold(2, vec![0.3], vec![1, 0]).unwrap();
        let s = set_of_rho(&r, 64).unwrap();
        assert_eq!(*s.points().last().unwrap(), (0.7, 0.3));
        assert!(set_of_rho(&RhoSpec::product(vec![0.2, 0.3, 0.5]).unwrap(), 10).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let p = PointSet2D::new(vec![(0.0, 0.0)]).unwrap();
        let q = PointSet2D::new(vec![(1.0, 0.0)]).unwrap();
        assert_eq!(hausdorff(&p, &p), 0.0);
        assert_eq!(hausdorff(&p, &q), 1.0);
        assert!(PointSet2D::new(vec![]).is_err());
    }

    #[test]
    fn word_sets_approach_rho_in_common_axes() {
        let rho = RhoSpec::triangular();
        let w = crate::measures::spread::spread_draw(&rho, 4000, &mut rng_for(1));
        let aligned = hausdorff_word_rho(&w, &rho, SET_OF_RHO_POINTS).unwrap();
        assert!(aligned < 0.05, "{aligned}");
        let crossed = hausdorff(&set_of_word(&w).unwrap(), &set_of_rho(&rho, SET_OF_RHO_POINTS).unwrap());
        assert!(crossed > 0.1, "{crossed}");
    }

    proptest! {
        #[test]
        fn hausdorff_is_a_metric(seed in any::<u64>()) {
            let mut rng = rng_for(seed);
            let mut rand_set = |n: usize| {
                PointSet2D::new((0..n).map(|_| (rng.random(), rng.random())).collect()).unwrap()
            };
            let (a, b, c) = (rand_set(7), rand_set(5), rand_set(9));
            prop_assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
            prop_assert!(hausdorff(&a, &c) <= hausdorff(&a, &b) + hausdorff(&b, &c) + 1e-12);
        }
    }
}
