//! Class-stratified k-fold assignment.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::DataError;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of_row: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] != fold)
            .collect()
    }
}

/// Shuffle each class independently with a seeded RNG and deal rows
/// round-robin into k folds, so every fold holds either floor(m/k) or
/// ceil(m/k) rows of each class.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment, DataError> {
    assert!(k >= 2, "fold count must be at least 2");
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..d.n_rows() {
        by_class[d.class_of(i) as usize].push(i);
    }
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < k {
            return Err(DataError::TooFewRowsPerClass {
                class,
                have: rows.len(),
                need: k,
            });
        }
    }
    let mut fold_of_row = vec![0usize; d.n_rows()];
    for (class, rows) in by_class.iter_mut().enumerate() {
        let mut rng = seed::rng(seed::mix(seed, &[class as u64]));
        rows.shuffle(&mut rng);
        for (pos, &row) in rows.iter().enumerate() {
            fold_of_row[row] = pos % k;
        }
    }
    Ok(FoldAssignment {
        fold_of_row,
        k,
        seed,
    })
}
