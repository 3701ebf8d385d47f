//! Experiment specification: a versioned TOML file whose keys mirror the
//! command-line flags. Flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hdc_poi::encoding::{EncoderConfig, EncoderKind, PatchMapping};
use hdc_poi::RetrainConfig;
use serde::{Deserialize, Serialize};

pub const SPEC_VERSION: u32 = 1;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Encoder {
    Poi,
    Pixelwise,
    Permutation2d,
}

impl Encoder {
    pub fn kind(self) -> EncoderKind {
        match self {
            Encoder::Poi => EncoderKind::Poi,
            Encoder::Pixelwise => EncoderKind::Pixelwise,
            Encoder::Permutation2d => EncoderKind::Permutation2d,
        }
    }

    pub fn uses_patches(self) -> bool {
        self == Encoder::Poi
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum PatchMap {
    #[default]
    Orthogonal,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub version: u32,
    /// Directory with `train-*` / `t10k-*` IDX files.
    pub dataset_dir: PathBuf,
    /// Directory with one `<corruption>/test_images.npy` + `test_labels.npy`
    /// pair per corruption.
    pub corruption_dir: Option<PathBuf>,
    pub corruptions: Vec<String>,
    pub encoder: Encoder,
    pub splits: Vec<usize>,
    pub patch_sizes: Vec<usize>,
    pub patch_mapping: PatchMap,
    pub dim: usize,
    pub threshold: u8,
    pub seed: u64,
    pub runs: usize,
    pub folds: usize,
    /// Training samples per class (after a seeded shuffle); all if unset.
    pub subset: Option<usize>,
    /// Test samples per class; all if unset.
    pub test_subset: Option<usize>,
    pub max_iters: usize,
    pub check_interval: usize,
    pub stop_threshold: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let enc = EncoderConfig::default();
        let train = RetrainConfig::default();
        Self {
            version: SPEC_VERSION,
            dataset_dir: PathBuf::from("data/mnist-desk"),
            corruption_dir: None,
            corruptions: Vec::new(),
            encoder: Encoder::Poi,
            splits: vec![enc.splits],
            patch_sizes: vec![enc.patch_size],
            patch_mapping: PatchMap::Orthogonal,
            dim: enc.dim,
            threshold: enc.threshold,
            seed: 0,
            runs: 10,
            folds: 10,
            subset: None,
            test_subset: None,
            max_iters: train.max_iterations,
            check_interval: train.check_interval,
            stop_threshold: train.stop_threshold,
            out: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).context("parsing experiment spec")?;
        if !table.contains_key("version") {
            bail!("experiment spec lacks a 'version' key");
        }
        let spec: ExperimentSpec = table.try_into().context("parsing experiment spec")?;
        if spec.version != SPEC_VERSION {
            bail!(
                "unsupported spec version {} (this build reads version {SPEC_VERSION})",
                spec.version
            );
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.splits.is_empty() || self.patch_sizes.is_empty() {
            bail!("split and patch-size lists must be non-empty");
        }
        if self.dim == 0 {
            bail!("dimension must be positive");
        }
        if self.runs == 0 {
            bail!("at least one run is required");
        }
        if self.folds < 2 {
            bail!("cross-validation needs at least two folds");
        }
        if self.check_interval == 0 {
            bail!("check interval must be positive");
        }
        Ok(())
    }

    pub fn retrain_config(&self) -> RetrainConfig {
        RetrainConfig {
            max_iterations: self.max_iters,
            check_interval: self.check_interval,
            stop_threshold: self.stop_threshold,
        }
    }

    /// Encoder configuration for one `(S, z)` combination.
    pub fn encoder_config(&self, splits: usize, patch_size: usize) -> EncoderConfig {
        EncoderConfig {
            kind: self.encoder.kind(),
            threshold: self.threshold,
            patch_size,
            splits,
            patch_mapping: match self.patch_mapping {
                PatchMap::Orthogonal => PatchMapping::Orthogonal,
                PatchMap::Linear => PatchMapping::Linear,
            },
            dim: self.dim,
        }
    }

    /// `(S, z)` combinations in ascending order. The patch size only matters
    /// for the POI encoder; the baselines use the first listed value.
    pub fn combinations(&self) -> Vec<(usize, usize)> {
        let mut zs = self.patch_sizes.clone();
        if !self.encoder.uses_patches() {
            zs.truncate(1);
        }
        let mut out: Vec<(usize, usize)> = self
            .splits
            .iter()
            .flat_map(|&s| zs.iter().map(move |&z| (s, z)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let spec = ExperimentSpec {
            corruption_dir: Some("c".into()),
            corruptions: vec!["shot_noise".into()],
            subset: Some(50),
            splits: vec![1, 9, 28],
            ..ExperimentSpec::default()
        };
        assert_eq!(ExperimentSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let spec =
            ExperimentSpec::from_toml("version = 1\nencoder = \"pixelwise\"\nsplits = [1, 9]\n")
                .unwrap();
        assert_eq!(spec.encoder, Encoder::Pixelwise);
        assert_eq!(spec.dim, 10_000);
        assert_eq!(spec.combinations(), vec![(1, 7), (9, 7)]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ExperimentSpec::from_toml("version = 2\n").is_err());
        assert!(ExperimentSpec::from_toml("seed = 2\n").is_err());
        assert!(ExperimentSpec::from_toml("version = 1\nbogus = 3\n").is_err());
    }

    #[test]
    fn combinations_sorted_and_deduplicated() {
        let spec = ExperimentSpec {
            splits: vec![9, 1, 9],
            patch_sizes: vec![7, 3],
            ..ExperimentSpec::default()
        };
        assert_eq!(spec.combinations(), vec![(1, 3), (1, 7), (9, 3), (9, 7)]);
    }
}
