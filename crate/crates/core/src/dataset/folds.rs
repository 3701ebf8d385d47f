use super::{DatasetError, DatasetResult, LabeledDataset};
use crate::rng::RandomSource;

/// Assignment of sample indices to `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub fold_count: usize,
    pub seed: u64,
    /// Fold index of every sample.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Seeded shuffle, then round-robin: the `i`-th shuffled sample goes to
    /// fold `i mod k`. Fold sizes differ by at most one.
    pub fn new(len: usize, k: usize, seed: u64) -> DatasetResult<Self> {
        if k == 0 || k > len {
            return Err(DatasetError::Invalid(format!(
                "cannot split {len} samples into {k} folds"
            )));
        }
        let mut order: Vec<usize> = (0..len).collect();
        RandomSource::new(seed).shuffle(&mut order);
        let mut assignments = vec![0; len];
        for (pos, &i) in order.iter().enumerate() {
            assignments[i] = pos % k;
        }
        Ok(Self {
            fold_count: k,
            seed,
            assignments,
        })
    }

    /// Indices in fold `f`, ascending.
    pub fn fold(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == f)
            .collect()
    }

    /// Indices outside fold `f`, ascending.
    pub fn train(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn make_folds(ds: &LabeledDataset, k: usize, seed: u64) -> DatasetResult<FoldPlan> {
    FoldPlan::new(ds.len(), k, seed)
}
