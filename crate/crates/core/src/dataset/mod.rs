//! Labeled image datasets: IDX (MNIST, Fashion-MNIST) and NPY (MNIST-C)
//! ingestion, per-class subsets and cross-validation folds.

mod folds;
mod idx;
mod npy;

pub use folds::{make_folds, FoldPlan};
pub use idx::{
    find_idx_pair, load_idx, parse_idx_images, parse_idx_labels, read_maybe_gzip, write_idx,
    write_idx_images, write_idx_labels, IdxImages, IMAGE_MAGIC, LABEL_MAGIC,
};
pub use npy::{load_npy_u8, parse_npy, write_npy, write_npy_u8, NpyArray, NpyDtype, NpyHeader};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::encoding::Image;
use crate::rng::RandomSource;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what}: bad magic number 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("{what}: truncated, expected {expected} bytes, found {found}")]
    Truncated {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what}: {found} trailing bytes after payload")]
    TrailingBytes { what: &'static str, found: usize },

    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("npy header field '{field}': {message}")]
    NpyHeader {
        field: &'static str,
        message: String,
    },

    #[error("label {label} at index {index} is outside 0..{classes}")]
    LabelOutOfRange {
        index: usize,
        label: i64,
        classes: u32,
    },

    #[error("invalid dataset: {0}")]
    Invalid(String),
}

pub type DatasetResult<T> = std::result::Result<T, DatasetError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Class count assumed by the loaders (digits / clothing categories).
pub const CLASS_COUNT: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub name: String,
    pub images: Vec<Image>,
    pub labels: Vec<u32>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        images: Vec<Image>,
        labels: Vec<u32>,
    ) -> DatasetResult<Self> {
        if images.len() != labels.len() {
            return Err(DatasetError::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if let Some(first) = images.first() {
            let (w, h) = (first.width(), first.height());
            if images.iter().any(|i| i.width() != w || i.height() != h) {
                return Err(DatasetError::Invalid("images differ in size".into()));
            }
        }
        if let Some(index) = labels.iter().position(|&l| l >= CLASS_COUNT) {
            return Err(DatasetError::LabelOutOfRange {
                index,
                label: labels[index] as i64,
                classes: CLASS_COUNT,
            });
        }
        Ok(Self {
            name: name.into(),
            images,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `(width, height)` of the images, `None` when empty.
    pub fn image_size(&self) -> Option<(usize, usize)> {
        self.images.first().map(|i| (i.width(), i.height()))
    }

    /// Sample count per label `0..CLASS_COUNT`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; CLASS_COUNT as usize];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Labels that occur at least once, ascending.
    pub fn classes(&self) -> Vec<u32> {
        let counts = self.class_counts();
        (0..CLASS_COUNT)
            .filter(|&c| counts[c as usize] > 0)
            .collect()
    }

    /// New dataset with the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Indices of the first `per_class` samples of every class after a
    /// seeded shuffle, returned in ascending order.
    pub fn subset_indices(&self, per_class: usize, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        RandomSource::new(seed).shuffle(&mut order);
        let mut taken = vec![0; CLASS_COUNT as usize];
        let mut out: Vec<usize> = order
            .into_iter()
            .filter(|&i| {
                let t = &mut taken[self.labels[i] as usize];
                *t += 1;
                *t <= per_class
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn per_class_subset(&self, per_class: usize, seed: u64) -> Self {
        self.select(&self.subset_indices(per_class, seed))
    }
}
