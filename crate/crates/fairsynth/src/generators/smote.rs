//! SMOTE-NC: interpolate continuous cells along base-neighbor segments and
//! assign categorical cells by neighbor majority vote. Requires at least one
//! continuous column.

use rand::Rng;

use crate::dataset::Cell;
use crate::error::FitError;
use crate::schema::{ColumnKind, DatasetSchema};
use crate::seed;

const DEFAULT_K: usize = 5;

#[derive(Debug, Clone)]
pub struct SmoteModel {
    cont_cols: Vec<usize>,
    cat_cols: Vec<usize>,
    /// Standardized continuous cells, row-major.
    standardized: Vec<Vec<f64>>,
    categorical: Vec<Vec<u32>>,
    means: Vec<f64>,
    stds: Vec<f64>,
    pub k: usize,
    /// Median of raw continuous-column standard deviations; its square is the
    /// distance penalty for each categorical mismatch.
    pub median_std: f64,
    n_columns: usize,
}

pub fn fit(rows: &[Vec<Cell>], schema: &DatasetSchema, _seed: u64) -> Result<SmoteModel, FitError> {
    if rows.len() < 2 {
        return Err(FitError::TooFewRows(rows.len()));
    }
    let cont_cols: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Continuous)
        .map(|(i, _)| i)
        .collect();
    if cont_cols.is_empty() {
        return Err(FitError::NotApplicable(
            "SMOTE-NC requires a continuous column".into(),
        ));
    }
    let cat_cols: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Discrete)
        .map(|(i, _)| i)
        .collect();

    let n = rows.len() as f64;
    let mut means = Vec::with_capacity(cont_cols.len());
    let mut stds = Vec::with_capacity(cont_cols.len());
    for &j in &cont_cols {
        let mean = rows.iter().map(|r| r[j].as_cont()).sum::<f64>() / n;
        let var = rows
            .iter()
            .map(|r| (r[j].as_cont() - mean).powi(2))
            .sum::<f64>()
            / n;
        means.push(mean);
        stds.push(var.sqrt());
    }
    let mut sorted_stds = stds.clone();
    sorted_stds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted_stds.len() / 2;
    let median_std = if sorted_stds.len() % 2 == 1 {
        sorted_stds[mid]
    } else {
        (sorted_stds[mid - 1] + sorted_stds[mid]) / 2.0
    };

    let standardized = rows
        .iter()
        .map(|r| {
            cont_cols
                .iter()
                .enumerate()
                .map(|(c, &j)| {
                    let s = if stds[c] > 0.0 { stds[c] } else { 1.0 };
                    (r[j].as_cont() - means[c]) / s
                })
                .collect()
        })
        .collect();
    let categorical = rows
        .iter()
        .map(|r| cat_cols.iter().map(|&j| r[j].as_disc()).collect())
        .collect();

    Ok(SmoteModel {
        cont_cols,
        cat_cols,
        standardized,
        categorical,
        means,
        stds,
        k: DEFAULT_K.min(rows.len() - 1),
        median_std,
        n_columns: schema.len(),
    })
}

impl SmoteModel {
    fn squared_distance(&self, a: usize, b: usize) -> f64 {
        let mut d: f64 = self.standardized[a]
            .iter()
            .zip(&self.standardized[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let penalty = self.median_std * self.median_std;
        for (x, y) in self.categorical[a].iter().zip(&self.categorical[b]) {
            if x != y {
                d += penalty;
            }
        }
        d
    }

    fn nearest(&self, base: usize) -> Vec<usize> {
        let mut dists: Vec<(f64, usize)> = (0..self.standardized.len())
            .filter(|&i| i != base)
            .map(|i| (self.squared_distance(base, i), i))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        dists.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    pub fn sample(&self, n: usize, sample_seed: u64) -> Vec<Vec<Cell>> {
        let mut rng = seed::rng(sample_seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let base = rng.random_range(0..self.standardized.len());
            let neighbors = self.nearest(base);
            let pick = neighbors[rng.random_range(0..neighbors.len())];
            let u: f64 = rng.random();

            let mut row = vec![Cell::Cont(0.0); self.n_columns];
            for (c, &j) in self.cont_cols.iter().enumerate() {
                let z = self.standardized[base][c]
                    + u * (self.standardized[pick][c] - self.standardized[base][c]);
                let s = if self.stds[c] > 0.0 {
                    self.stds[c]
                } else {
                    1.0
                };
                row[j] = Cell::Cont(z * s + self.means[c]);
            }
            for (c, &j) in self.cat_cols.iter().enumerate() {
                row[j] = Cell::Disc(self.vote(c, base, &neighbors));
            }
            out.push(row);
        }
        out
    }

    /// Majority vote among the k neighbors; ties fall back to the base value.
    fn vote(&self, cat_idx: usize, base: usize, neighbors: &[usize]) -> u32 {
        let mut counts: std::collections::BTreeMap<u32, usize> = Default::default();
        for &i in neighbors {
            *counts.entry(self.categorical[i][cat_idx]).or_default() += 1;
        }
        let max = counts.values().copied().max().unwrap();
        let leaders: Vec<u32> = counts
            .iter()
            .filter(|(_, &c)| c == max)
            .map(|(&cat, _)| cat)
            .collect();
        if leaders.len() == 1 {
            leaders[0]
        } else {
            self.categorical[base][cat_idx]
        }
    }
}
