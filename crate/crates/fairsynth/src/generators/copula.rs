//! Gaussian copula synthesis: empirical marginals per column, a correlation
//! matrix estimated on Gaussian scores, and sampling by inverting the
//! marginals through multivariate normals.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Cell;
use crate::error::FitError;
use crate::schema::{ColumnKind, DatasetSchema};
use crate::seed;

#[derive(Debug, Clone)]
enum Marginal {
    /// Sorted empirical values; inverted by linear interpolation of the
    /// quantile function at plotting positions (i + 0.5) / n.
    Continuous(Vec<f64>),
    /// Observed categories with cumulative frequencies, ascending by index.
    Discrete(Vec<(u32, f64)>),
}

#[derive(Debug, Clone)]
pub struct CopulaModel {
    marginals: Vec<Marginal>,
    /// Unit-diagonal correlation matrix after ridge regularization.
    correlation: DMatrix<f64>,
    factor: DMatrix<f64>,
    pub ridge: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// Gaussian scores for a continuous column via mid-ranks:
/// z_i = Phi^-1((midrank_i - 0.5) / n).
fn continuous_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let normal = std_normal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut midrank = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks are 1-based; average over the tie block
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            midrank[idx] = mid;
        }
        i = j + 1;
    }
    midrank
        .into_iter()
        .map(|r| normal.inverse_cdf((r - 0.5) / n as f64))
        .collect()
}

fn fit_discrete_marginal(values: &[u32]) -> Vec<(u32, f64)> {
    let n = values.len() as f64;
    let mut cats: Vec<u32> = values.to_vec();
    cats.sort_unstable();
    cats.dedup();
    let mut cum = 0.0;
    cats.into_iter()
        .map(|c| {
            cum += values.iter().filter(|&&v| v == c).count() as f64 / n;
            (c, cum)
        })
        .collect()
}

/// Scores for a discrete column: dither uniformly within each category's
/// CDF band, then map through Phi^-1.
fn discrete_scores<R: Rng>(values: &[u32], marginal: &[(u32, f64)], rng: &mut R) -> Vec<f64> {
    let normal = std_normal();
    values
        .iter()
        .map(|&v| {
            let pos = marginal.iter().position(|(c, _)| *c == v).unwrap();
            let lo = if pos == 0 { 0.0 } else { marginal[pos - 1].1 };
            let hi = marginal[pos].1;
            let u = (lo + rng.random::<f64>() * (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
            normal.inverse_cdf(u)
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    (cov / (va * vb).sqrt()).clamp(-1.0, 1.0)
}

pub fn fit(
    rows: &[Vec<Cell>],
    schema: &DatasetSchema,
    fit_seed: u64,
) -> Result<CopulaModel, FitError> {
    if rows.len() < 2 {
        return Err(FitError::TooFewRows(rows.len()));
    }
    let n = rows.len();
    let m = schema.len();
    let mut rng = seed::rng(seed::mix(fit_seed, &[0x5c0]));

    let mut marginals = Vec::with_capacity(m);
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (j, col) in schema.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Continuous => {
                let values: Vec<f64> = rows.iter().map(|r| r[j].as_cont()).collect();
                scores.push(continuous_scores(&values));
                let mut sorted = values;
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                marginals.push(Marginal::Continuous(sorted));
            }
            ColumnKind::Discrete => {
                let values: Vec<u32> = rows.iter().map(|r| r[j].as_disc()).collect();
                let marginal = fit_discrete_marginal(&values);
                scores.push(discrete_scores(&values, &marginal, &mut rng));
                marginals.push(Marginal::Discrete(marginal));
            }
        }
    }

    let mut corr = DMatrix::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let c = pearson(&scores[i], &scores[j]);
            corr[(i, j)] = c;
            corr[(j, i)] = c;
        }
    }
    let _ = n;

    // ridge escalation until Cholesky succeeds; rescale back to unit diagonal
    let mut ridge = 1e-6;
    loop {
        let mut m_reg = corr.clone();
        for i in 0..m {
            m_reg[(i, i)] += ridge;
        }
        let scale = 1.0 / (1.0 + ridge);
        let rescaled = m_reg.map(|v| v * scale);
        let mut unit = rescaled.clone();
        for i in 0..m {
            unit[(i, i)] = 1.0;
        }
        if let Some(chol) = Cholesky::new(unit.clone()) {
            return Ok(CopulaModel {
                marginals,
                correlation: unit,
                factor: chol.l(),
                ridge,
            });
        }
        ridge *= 10.0;
        assert!(ridge < 10.0, "correlation matrix cannot be regularized");
    }
}

fn invert_continuous(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let t = u * n as f64 - 0.5;
    if t <= 0.0 {
        return sorted[0];
    }
    if t >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let i = t.floor() as usize;
    let frac = t - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn invert_discrete(marginal: &[(u32, f64)], u: f64) -> u32 {
    for (cat, cum) in marginal {
        if u <= *cum {
            return *cat;
        }
    }
    marginal.last().unwrap().0
}

impl CopulaModel {
    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    pub fn sample(&self, n: usize, sample_seed: u64) -> Vec<Vec<Cell>> {
        let normal = std_normal();
        let m = self.marginals.len();
        let mut rng = seed::rng(sample_seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let eps = DVector::from_fn(m, |_, _| {
                let u: f64 = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12);
                normal.inverse_cdf(u)
            });
            let z = &self.factor * eps;
            let row = (0..m)
                .map(|j| {
                    let u = normal.cdf(z[j]);
                    match &self.marginals[j] {
                        Marginal::Continuous(sorted) => Cell::Cont(invert_continuous(sorted, u)),
                        Marginal::Discrete(marginal) => Cell::Disc(invert_discrete(marginal, u)),
                    }
                })
                .collect();
            out.push(row);
        }
        out
    }
}
