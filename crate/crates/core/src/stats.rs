//! Goodness-of-fit and summary statistics used by the diagnostics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn chi_square_tail(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof).expect("positive degrees of freedom");
    d.sf(stat)
}

/// Pearson test of `counts` against the uniform law on its cells.
pub fn chi_square_uniform(counts: &[u64]) -> Result<TestResult> {
    if counts.len() < 2 {
        return Err(Error::InvalidArgument("need at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    let e = total as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dof = (counts.len() - 1) as f64;
    Ok(TestResult { statistic: stat, dof, p_value: chi_square_tail(stat, dof) })
}

/// Pearson independence test on a contingency table; empty rows and columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<TestResult> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("ragged contingency table".into()));
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let total: u64 = row_sums.iter().sum();
    let rows_used: Vec<usize> = (0..table.len()).filter(|&i| row_sums[i] > 0).collect();
    let cols_used: Vec<usize> = (0..cols).filter(|&j| col_sums[j] > 0).collect();
    if rows_used.len() < 2 || cols_used.len() < 2 {
        return Err(Error::InvalidArgument("table needs two nonempty rows and columns".into()));
    }
    let mut stat = 0.0;
    for &i in &rows_used {
        for &j in &cols_used {
            let e = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            stat += (table[i][j] as f64 - e).powi(2) / e;
        }
    }
    let dof = ((rows_used.len() - 1) * (cols_used.len() - 1)) as f64;
    Ok(TestResult { statistic: stat, dof, p_value: chi_square_tail(stat, dof) })
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.27 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let f = cdf(xi);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    let p = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
    Ok(TestResult { statistic: d, dof: n, p_value: p })
}

/// Two-sided pooled z-test for equal success probabilities.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2 {
        return Err(Error::InvalidArgument("bad proportion counts".into()));
    }
    let (p1, p2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
    let p = (x1 + x2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        let p_value = if p1 == p2 { 1.0 } else { 0.0 };
        return Ok(TestResult { statistic: 0.0, dof: 1.0, p_value });
    }
    let z = (p1 - p2) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(TestResult { statistic: z, dof: 1.0, p_value: 2.0 * normal.sf(z.abs()) })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}
