//! Experiment harness for the `hdc-poi` encoders and classifier.

pub mod experiments;
pub mod metrics;
pub mod spec;

pub use experiments::{
    emit_similarity_figures, encode_all, run_cv, run_cv_sweep, run_independent, run_robustness,
    run_test, Data, EvalSet, FigureSpec,
};
pub use metrics::{render_table, Aggregate, MetricsRecord, RobustnessResult, SweepResult};
pub use spec::{Encoder, ExperimentSpec};

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("metrics serialize") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, to_json(value)).with_context(|| format!("writing {}", path.display()))
}
