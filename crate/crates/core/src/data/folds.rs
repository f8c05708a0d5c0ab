use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Label};
use crate::scalar::Scalar;

/// Assignment of every record to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `None` when the folds came with the data.
    pub seed: Option<u64>,
}

impl FoldSplit {
    /// Uses the fold ids stored in the dataset.
    pub fn from_dataset<T: Scalar>(dataset: &Dataset<T>) -> Option<FoldSplit> {
        let folds = dataset.folds()?;
        let k = folds.iter().max().map_or(0, |m| m + 1);
        Some(FoldSplit {
            k,
            assignments: folds.to_vec(),
            seed: None,
        })
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// `(positives, negatives)` per fold.
    pub fn class_counts<T: Scalar>(&self, dataset: &Dataset<T>) -> Vec<(usize, usize)> {
        let mut counts = vec![(0, 0); self.k];
        for (r, &f) in dataset.records().iter().zip(&self.assignments) {
            if r.label.is_positive() {
                counts[f].0 += 1;
            } else {
                counts[f].1 += 1;
            }
        }
        counts
    }
}

/// Shuffles each class with a seeded ChaCha20 stream and deals it round-robin
/// over the folds. Negatives continue the deal where positives stopped, so
/// fold sizes also stay within one of each other.
pub fn stratified_folds<T: Scalar>(dataset: &Dataset<T>, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(CalibError::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, r) in dataset.records().iter().enumerate() {
        if r.label.is_positive() {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    for (label, members) in [(Label::Positive, &pos), (Label::Negative, &neg)] {
        if members.len() < k {
            return Err(CalibError::TooFewPerClass {
                label: label.as_i8(),
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut assignments = vec![0; dataset.len()];
    for (j, &i) in pos.iter().chain(&neg).enumerate() {
        assignments[i] = j % k;
    }
    Ok(FoldSplit {
        k,
        assignments,
        seed: Some(seed),
    })
}
