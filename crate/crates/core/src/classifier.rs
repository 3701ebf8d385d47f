//! Centroid classifier over binary hypervectors.
//!
//! Each class keeps a [`Bundle`] of its training vectors; the binarized
//! bundle is the class prototype and inference picks the most similar
//! prototype. [`retrain`] refines the bundles with misclassification-driven
//! add/remove updates and keeps the best model seen.

use crate::bundle::Bundle;
use crate::error::{HdcError, Result};
use crate::hv::{check_same, hamming_words, Hypervector};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierModel {
    labels: Vec<u32>,
    bundles: Vec<Bundle>,
    prototypes: Vec<Hypervector>,
    dim: usize,
    seed: u64,
}

impl ClassifierModel {
    /// Assembles a model from stored parts, e.g. when loading from disk.
    /// Prototypes are taken as given.
    pub fn from_parts(
        labels: Vec<u32>,
        bundles: Vec<Bundle>,
        prototypes: Vec<Hypervector>,
        seed: u64,
    ) -> Result<Self> {
        check_labels(&labels)?;
        if bundles.len() != labels.len() || prototypes.len() != labels.len() {
            return Err(HdcError::LengthMismatch {
                what: "labels vs class vectors",
                left: labels.len(),
                right: bundles.len().min(prototypes.len()),
            });
        }
        let dim = bundles[0].dim();
        for (b, p) in bundles.iter().zip(&prototypes) {
            check_same(dim, b.dim())?;
            check_same(dim, p.dim())?;
        }
        Ok(Self {
            labels,
            bundles,
            prototypes,
            dim,
            seed,
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn prototypes(&self) -> &[Hypervector] {
        &self.prototypes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Seed of the stream the model was trained with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    fn class_index(&self, label: u32) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(HdcError::UnknownLabel(label))
    }

    /// Re-binarizes every class bundle. Class `c` takes its tie bits from
    /// `ties.child(c)`, so refreshing twice from the same source is a no-op.
    pub fn refresh(&mut self, ties: &RandomSource) {
        self.prototypes = self
            .bundles
            .iter()
            .enumerate()
            .map(|(c, b)| b.binarize(&mut ties.child(c as u64)))
            .collect();
    }

    /// Index of the most similar prototype; ties go to the lowest index.
    pub fn predict_index(&self, sample: &Hypervector) -> Result<usize> {
        check_same(self.dim, sample.dim())?;
        let mut best = (usize::MAX, 0);
        for (c, p) in self.prototypes.iter().enumerate() {
            let h = hamming_words(p.words(), sample.words());
            if h < best.0 {
                best = (h, c);
            }
        }
        Ok(best.1)
    }

    pub fn predict(&self, sample: &Hypervector) -> Result<u32> {
        Ok(self.labels[self.predict_index(sample)?])
    }

    /// Similarity of `sample` to every prototype, in label order.
    pub fn scores(&self, sample: &Hypervector) -> Result<Vec<f64>> {
        self.prototypes
            .iter()
            .map(|p| p.similarity(sample))
            .collect()
    }
}

fn check_labels(labels: &[u32]) -> Result<()> {
    if labels.is_empty() {
        return Err(HdcError::Empty("label"));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(HdcError::DuplicateLabel(*l));
        }
    }
    Ok(())
}

fn check_samples(samples: &[Hypervector], labels: &[u32]) -> Result<()> {
    if samples.len() != labels.len() {
        return Err(HdcError::LengthMismatch {
            what: "samples vs labels",
            left: samples.len(),
            right: labels.len(),
        });
    }
    Ok(())
}

/// Bundles every sample into its class and binarizes.
///
/// `classes` is the declared label set, in the order used for prediction
/// ties. Every declared class needs at least one sample.
pub fn train_initial(
    samples: &[Hypervector],
    labels: &[u32],
    classes: &[u32],
    rng: &RandomSource,
) -> Result<ClassifierModel> {
    check_labels(classes)?;
    check_samples(samples, labels)?;
    let dim = samples.first().ok_or(HdcError::Empty("training"))?.dim();
    let mut model = ClassifierModel {
        labels: classes.to_vec(),
        bundles: vec![Bundle::new(dim)?; classes.len()],
        prototypes: Vec::new(),
        dim,
        seed: rng.seed(),
    };
    for (s, &l) in samples.iter().zip(labels) {
        let c = model.class_index(l)?;
        model.bundles[c].add(s)?;
    }
    if let Some(c) = model.bundles.iter().position(|b| b.n() == 0) {
        return Err(HdcError::EmptyClass(classes[c]));
    }
    model.refresh(&rng.child(0));
    Ok(model)
}

/// Fraction of samples whose prediction matches the label.
pub fn evaluate(model: &ClassifierModel, samples: &[Hypervector], labels: &[u32]) -> Result<f64> {
    check_samples(samples, labels)?;
    if samples.is_empty() {
        return Err(HdcError::Empty("evaluation"));
    }
    let mut correct = 0usize;
    for (s, &l) in samples.iter().zip(labels) {
        correct += usize::from(model.predict(s)? == l);
    }
    Ok(correct as f64 / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrainConfig {
    pub max_iterations: usize,
    /// Early-stop checks happen every `check_interval` iterations.
    pub check_interval: usize,
    /// Training stops at a check once the best accuracy strictly exceeds this.
    pub stop_threshold: f64,
}

impl Default for RetrainConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            check_interval: 100,
            stop_threshold: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub best_train_accuracy: f64,
    /// 1-based iteration whose model was kept.
    pub best_iteration: usize,
    pub iterations_run: usize,
    /// Training accuracy measured at the start of each iteration.
    pub accuracy_trace: Vec<f64>,
    /// Stopped before `max_iterations`, by threshold or convergence.
    pub stopped_early: bool,
    /// A sweep without a single misclassification ended training.
    pub converged: bool,
    /// Removals skipped because the predicted class never held the sample.
    pub skipped_removals: usize,
}

/// Iterative retraining.
///
/// Each iteration measures training accuracy with the current prototypes,
/// snapshots the model if it is the best so far, then for every
/// misclassified sample adds it to its true class bundle and removes it from
/// the predicted one. Prototypes are re-binarized once per iteration with
/// tie bits from `rng.child(iteration)`. Every `check_interval` iterations,
/// training stops if the best accuracy exceeds `stop_threshold`. A sweep
/// with no misclassification ends training, since nothing would change.
///
/// A removal that would underflow the predicted class bundle (the sample
/// was never part of it) is skipped and counted in the report.
pub fn retrain(
    model: &ClassifierModel,
    samples: &[Hypervector],
    labels: &[u32],
    cfg: &RetrainConfig,
    rng: &RandomSource,
) -> Result<(ClassifierModel, TrainingReport)> {
    check_samples(samples, labels)?;
    if samples.is_empty() {
        return Err(HdcError::Empty("training"));
    }
    if cfg.check_interval == 0 {
        return Err(HdcError::InvalidConfig(
            "check interval must be positive".into(),
        ));
    }
    let targets = labels
        .iter()
        .map(|&l| model.class_index(l))
        .collect::<Result<Vec<_>>>()?;
    for s in samples {
        check_same(model.dim, s.dim())?;
    }

    let mut current = model.clone();
    let mut best = model.clone();
    let mut report = TrainingReport {
        best_train_accuracy: f64::NEG_INFINITY,
        best_iteration: 0,
        iterations_run: 0,
        accuracy_trace: Vec::new(),
        stopped_early: false,
        converged: false,
        skipped_removals: 0,
    };
    let mut wrong = Vec::new();

    for it in 1..=cfg.max_iterations {
        wrong.clear();
        for (i, s) in samples.iter().enumerate() {
            let p = current.predict_index(s)?;
            if p != targets[i] {
                wrong.push((i, p));
            }
        }
        let acc = 1.0 - wrong.len() as f64 / samples.len() as f64;
        report.accuracy_trace.push(acc);
        report.iterations_run = it;
        if acc > report.best_train_accuracy {
            report.best_train_accuracy = acc;
            report.best_iteration = it;
            best.clone_from(&current);
        }
        if wrong.is_empty() {
            report.converged = true;
            report.stopped_early = it < cfg.max_iterations;
            break;
        }

        for &(i, p) in &wrong {
            let s = &samples[i];
            current.bundles[targets[i]].add(s)?;
            if current.bundles[p].can_remove(s) {
                current.bundles[p].remove(s)?;
            } else {
                report.skipped_removals += 1;
            }
        }
        current.refresh(&rng.child(it as u64));

        if it % cfg.check_interval == 0 && report.best_train_accuracy > cfg.stop_threshold {
            report.stopped_early = it < cfg.max_iterations;
            break;
        }
    }
    if report.iterations_run == 0 {
        report.best_train_accuracy = evaluate(model, samples, labels)?;
    }
    Ok((best, report))
}
