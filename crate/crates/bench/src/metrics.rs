//! Result records. Accuracies are fractions in `[0, 1]`; the text tables
//! print percentages. Standard deviations are population (divide by `n`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::spec::{Encoder, PatchMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                std: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Settings that determine a record, echoed verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub encoder: Encoder,
    pub splits: usize,
    pub patch_size: usize,
    pub patch_mapping: PatchMap,
    pub dim: usize,
    pub threshold: u8,
    pub subset: Option<usize>,
    pub test_subset: Option<usize>,
    pub max_iters: usize,
    pub check_interval: usize,
    pub stop_threshold: f64,
}

/// One fold (cross-validation) or one independent run (test, robustness).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub index: usize,
    pub seed: u64,
    pub train_accuracy: f64,
    /// Validation accuracy for folds, test accuracy for runs.
    pub eval_accuracy: f64,
    pub iterations_to_best: usize,
    pub iterations_run: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// `cv`, `test`, or `robustness/<corruption>`.
    pub kind: String,
    pub config: ConfigEcho,
    pub root_seed: u64,
    pub runs: Vec<RunEntry>,
    pub train_accuracy: Aggregate,
    pub eval_accuracy: Aggregate,
    pub iterations_to_best: Aggregate,
}

impl MetricsRecord {
    pub fn new(
        kind: impl Into<String>,
        config: ConfigEcho,
        root_seed: u64,
        runs: Vec<RunEntry>,
    ) -> Self {
        let col = |f: fn(&RunEntry) -> f64| Aggregate::of(&runs.iter().map(f).collect::<Vec<_>>());
        Self {
            kind: kind.into(),
            config,
            root_seed,
            train_accuracy: col(|r| r.train_accuracy),
            eval_accuracy: col(|r| r.eval_accuracy),
            iterations_to_best: col(|r| r.iterations_to_best as f64),
            runs,
        }
    }

    /// Recomputes the aggregates from the run entries.
    pub fn recomputed(&self) -> Self {
        Self::new(
            self.kind.clone(),
            self.config.clone(),
            self.root_seed,
            self.runs.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub splits: usize,
    pub patch_size: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ordered by `(splits, patch_size)`.
    pub records: Vec<MetricsRecord>,
    pub skipped: Vec<Skipped>,
    /// Index into `records` of the best mean validation accuracy.
    pub best: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionError {
    pub corruption: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessResult {
    pub clean: MetricsRecord,
    pub corruptions: Vec<MetricsRecord>,
    /// Mean and spread of the per-corruption mean accuracies.
    pub cross_corruption: Option<Aggregate>,
    pub errors: Vec<CorruptionError>,
}

fn pct(a: &Aggregate) -> String {
    format!("{:6.2} (± {:.2})", 100.0 * a.mean, 100.0 * a.std)
}

/// Aligned text table, one line per record.
pub fn render_table(records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:<13} {:>3} {:>3} {:>6} {:>18} {:>18} {:>10}",
        "kind", "encoder", "S", "z", "runs", "train acc %", "eval acc %", "iters"
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:<24} {:<13} {:>3} {:>3} {:>6} {:>18} {:>18} {:>10.1}",
            r.kind,
            format!("{:?}", r.config.encoder).to_lowercase(),
            r.config.splits,
            r.config.patch_size,
            r.runs.len(),
            pct(&r.train_accuracy),
            pct(&r.eval_accuracy),
            r.iterations_to_best.mean
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std_of_five_values() {
        // per-corruption means of a five-corruption table and their summary
        let a = Aggregate::of(&[41.98, 57.60, 18.87, 11.76, 36.91]);
        assert!((a.mean - 33.424).abs() < 1e-9);
        assert!((a.std - 16.44).abs() < 0.005, "{}", a.std);
    }

    #[test]
    fn single_run_has_zero_std() {
        let a = Aggregate::of(&[0.9]);
        assert_eq!((a.mean, a.std), (0.9, 0.0));
    }

    #[test]
    fn aggregates_recompute() {
        let echo = ConfigEcho {
            dataset: "d".into(),
            encoder: Encoder::Poi,
            splits: 9,
            patch_size: 7,
            patch_mapping: PatchMap::Orthogonal,
            dim: 100,
            threshold: 0,
            subset: None,
            test_subset: None,
            max_iters: 10,
            check_interval: 5,
            stop_threshold: 0.99,
        };
        let runs = (0..3)
            .map(|i| RunEntry {
                index: i,
                seed: i as u64,
                train_accuracy: 0.5 + 0.1 * i as f64,
                eval_accuracy: 0.4 + 0.05 * i as f64,
                iterations_to_best: i + 1,
                iterations_run: 10,
                stopped_early: false,
            })
            .collect();
        let r = MetricsRecord::new("test", echo, 7, runs);
        let again = r.recomputed();
        assert!(
            (again.eval_accuracy.mean - r.eval_accuracy.mean).abs() <= 1e-9 * r.eval_accuracy.mean
        );
        assert!(
            (again.eval_accuracy.std - r.eval_accuracy.std).abs() <= 1e-9 * r.eval_accuracy.std
        );
        assert_eq!(r.iterations_to_best.mean, 2.0);
        assert!(render_table(&[r]).lines().count() == 2);
    }
}
