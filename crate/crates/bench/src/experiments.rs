//! Experiment drivers: cross-validated sweeps, independent test runs,
//! robustness evaluation, and figure data for the position mappings.
//!
//! Seeds: every random stream derives from the root seed. Run `r` and fold
//! `f` use `derive_seed(root, r)` / `derive_seed(root, f)`; within a run the
//! item memories, the per-sample tie streams of each data split, and the
//! training stream are separate named children. Sample `i` of a split is
//! encoded with child `i` of that split's stream, so results do not depend
//! on how samples are scheduled across worker threads.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hdc_poi::dataset::{find_idx_pair, load_idx, load_npy_u8, FoldPlan, LabeledDataset};
use hdc_poi::encoding::{EncoderConfig, ImageEncoder};
use hdc_poi::mapping::{
    build_concatenation, build_linear, build_local_linear, build_orthogonal, ItemMemory,
};
use hdc_poi::{derive_seed, retrain, train_initial, ClassifierModel, Hypervector, RandomSource};
use rayon::prelude::*;

use crate::metrics::{
    Aggregate, ConfigEcho, CorruptionError, MetricsRecord, RobustnessResult, RunEntry, Skipped,
    SweepResult,
};
use crate::spec::ExperimentSpec;

const SUBSET_TAG: u64 = 0x5EED_0001;
const TEST_SUBSET_TAG: u64 = 0x5EED_0002;
const FOLD_PLAN_TAG: u64 = 0x5EED_0003;

/// Training and test data after per-class subsetting.
#[derive(Debug, Clone)]
pub struct Data {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

impl Data {
    pub fn load(spec: &ExperimentSpec) -> Result<Self> {
        let dir = &spec.dataset_dir;
        let (ti, tl) = find_idx_pair(dir, "train")?;
        let (ei, el) = find_idx_pair(dir, "t10k")?;
        let train = load_idx(&ti, &tl)
            .with_context(|| format!("loading training set from {}", dir.display()))?;
        let test = load_idx(&ei, &el)
            .with_context(|| format!("loading test set from {}", dir.display()))?;
        Ok(Self::from_parts(spec, train, test))
    }

    pub fn from_parts(spec: &ExperimentSpec, train: LabeledDataset, test: LabeledDataset) -> Self {
        Self {
            train: subset(&train, spec.subset, derive_seed(spec.seed, SUBSET_TAG)),
            test: subset_test(spec, &test),
        }
    }

    fn size(&self) -> Result<(usize, usize)> {
        match self.train.image_size() {
            Some(s) => Ok(s),
            None => bail!("training set is empty"),
        }
    }
}

fn subset(ds: &LabeledDataset, per_class: Option<usize>, seed: u64) -> LabeledDataset {
    match per_class {
        Some(n) => ds.per_class_subset(n, seed),
        None => ds.clone(),
    }
}

/// The test subset; corrupted copies of the test set get the same
/// selection because it depends only on the labels and the seed.
fn subset_test(spec: &ExperimentSpec, ds: &LabeledDataset) -> LabeledDataset {
    subset(
        ds,
        spec.test_subset,
        derive_seed(spec.seed, TEST_SUBSET_TAG),
    )
}

/// Encodes every image with tie stream `stream.child(i)` for sample `i`.
pub fn encode_all(
    encoder: &ImageEncoder,
    ds: &LabeledDataset,
    stream: &RandomSource,
) -> Result<Vec<Hypervector>> {
    ds.images
        .par_iter()
        .enumerate()
        .map(|(i, img)| encoder.encode_image(img, &mut stream.child(i as u64)))
        .collect::<hdc_poi::Result<Vec<_>>>()
        .map_err(Into::into)
}

fn accuracy(model: &ClassifierModel, xs: &[Hypervector], ys: &[u32]) -> Result<f64> {
    if xs.is_empty() {
        bail!("evaluation set is empty");
    }
    let correct: usize = xs
        .par_iter()
        .zip(ys)
        .map(|(x, &y)| model.predict(x).map(|p| usize::from(p == y)))
        .collect::<hdc_poi::Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(correct as f64 / xs.len() as f64)
}

struct Trained {
    model: ClassifierModel,
    train_accuracy: f64,
    iterations_to_best: usize,
    iterations_run: usize,
    stopped_early: bool,
}

fn train(
    spec: &ExperimentSpec,
    xs: &[Hypervector],
    ys: &[u32],
    rng: &RandomSource,
) -> Result<Trained> {
    let mut classes: Vec<u32> = ys.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let initial = train_initial(xs, ys, &classes, rng)?;
    let (model, report) = retrain(&initial, xs, ys, &spec.retrain_config(), rng)?;
    log::debug!(
        "trained: best {:.4} at iteration {} of {}",
        report.best_train_accuracy,
        report.best_iteration,
        report.iterations_run
    );
    Ok(Trained {
        model,
        train_accuracy: report.best_train_accuracy,
        iterations_to_best: report.best_iteration,
        iterations_run: report.iterations_run,
        stopped_early: report.stopped_early,
    })
}

fn echo(spec: &ExperimentSpec, cfg: &EncoderConfig) -> ConfigEcho {
    ConfigEcho {
        dataset: spec.dataset_dir.display().to_string(),
        encoder: spec.encoder,
        splits: cfg.splits,
        patch_size: cfg.patch_size,
        patch_mapping: spec.patch_mapping,
        dim: cfg.dim,
        threshold: cfg.threshold,
        subset: spec.subset,
        test_subset: spec.test_subset,
        max_iters: spec.max_iters,
        check_interval: spec.check_interval,
        stop_threshold: spec.stop_threshold,
    }
}

fn entry(index: usize, seed: u64, t: &Trained, eval_accuracy: f64) -> RunEntry {
    RunEntry {
        index,
        seed,
        train_accuracy: t.train_accuracy,
        eval_accuracy,
        iterations_to_best: t.iterations_to_best,
        iterations_run: t.iterations_run,
        stopped_early: t.stopped_early,
    }
}

/// k-fold cross-validation of one `(S, z)` combination on the training set.
/// Encodings are computed once and shared by all folds.
pub fn run_cv(
    spec: &ExperimentSpec,
    data: &Data,
    splits: usize,
    patch_size: usize,
) -> Result<MetricsRecord> {
    let (w, h) = data.size()?;
    let cfg = spec.encoder_config(splits, patch_size);
    let root = RandomSource::new(spec.seed);
    let encoder = ImageEncoder::new(cfg.clone(), w, h, &root.named("memories"))?;
    let xs = encode_all(&encoder, &data.train, &root.named("encode-train"))?;
    let ys = &data.train.labels;
    let plan = FoldPlan::new(xs.len(), spec.folds, derive_seed(spec.seed, FOLD_PLAN_TAG))?;
    let mut runs = Vec::with_capacity(spec.folds);
    for f in 0..spec.folds {
        let (tr, va) = (plan.train(f), plan.fold(f));
        let pick = |idx: &[usize]| -> (Vec<Hypervector>, Vec<u32>) {
            (
                idx.iter().map(|&i| xs[i].clone()).collect(),
                idx.iter().map(|&i| ys[i]).collect(),
            )
        };
        let (tx, ty) = pick(&tr);
        let (vx, vy) = pick(&va);
        let seed = derive_seed(spec.seed, f as u64);
        let t = train(spec, &tx, &ty, &RandomSource::new(seed))?;
        let acc = accuracy(&t.model, &vx, &vy)?;
        log::info!("S={splits} z={patch_size} fold {f}: validation {:.4}", acc);
        runs.push(entry(f, seed, &t, acc));
    }
    Ok(MetricsRecord::new("cv", echo(spec, &cfg), spec.seed, runs))
}

/// Cross-validation over every `(S, z)` combination of the spec.
/// Inadmissible combinations are skipped with the reason recorded.
pub fn run_cv_sweep(spec: &ExperimentSpec, data: &Data) -> Result<SweepResult> {
    spec.validate()?;
    let (w, h) = data.size()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (s, z) in spec.combinations() {
        if let Err(e) = spec.encoder_config(s, z).validate(w, h) {
            log::warn!("skipping S={s} z={z}: {e}");
            skipped.push(Skipped {
                splits: s,
                patch_size: z,
                reason: e.to_string(),
            });
            continue;
        }
        records.push(run_cv(spec, data, s, z)?);
    }
    let best = records
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
            Some((_, m)) if m >= r.eval_accuracy.mean => acc,
            _ => Some((i, r.eval_accuracy.mean)),
        })
        .map(|(i, _)| i);
    Ok(SweepResult {
        records,
        skipped,
        best,
    })
}

/// A named evaluation set for [`run_independent`].
pub struct EvalSet<'a> {
    pub name: &'a str,
    pub data: &'a LabeledDataset,
}

/// Output of the independent train-and-evaluate runs.
pub struct RunsOutcome {
    /// One record per evaluation set, in input order.
    pub records: Vec<MetricsRecord>,
    /// The trained model of every run.
    pub models: Vec<ClassifierModel>,
}

/// `spec.runs` independently seeded runs: fresh item memories, encode,
/// train on the training set, evaluate on every set in `evals`.
pub fn run_independent(
    spec: &ExperimentSpec,
    train_set: &LabeledDataset,
    evals: &[EvalSet],
    splits: usize,
    patch_size: usize,
) -> Result<RunsOutcome> {
    spec.validate()?;
    let Some((w, h)) = train_set.image_size() else {
        bail!("training set is empty");
    };
    let cfg = spec.encoder_config(splits, patch_size);
    cfg.validate(w, h)?;
    let mut entries: Vec<Vec<RunEntry>> = vec![Vec::new(); evals.len()];
    let mut models = Vec::with_capacity(spec.runs);
    for r in 0..spec.runs {
        let seed = derive_seed(spec.seed, r as u64);
        let rng = RandomSource::new(seed);
        let encoder = ImageEncoder::new(cfg.clone(), w, h, &rng.named("memories"))?;
        let xs = encode_all(&encoder, train_set, &rng.named("encode-train"))?;
        let t = train(spec, &xs, &train_set.labels, &rng.named("train"))?;
        for (k, ev) in evals.iter().enumerate() {
            let ex = encode_all(
                &encoder,
                ev.data,
                &rng.named(&format!("encode-{}", ev.name)),
            )?;
            let acc = accuracy(&t.model, &ex, &ev.data.labels)?;
            log::info!("S={splits} z={patch_size} run {r} {}: {:.4}", ev.name, acc);
            entries[k].push(entry(r, seed, &t, acc));
        }
        models.push(t.model);
    }
    let records = evals
        .iter()
        .zip(entries)
        .map(|(ev, runs)| {
            let kind = if ev.name == "test" {
                "test".to_string()
            } else {
                format!("robustness/{}", ev.name)
            };
            MetricsRecord::new(kind, echo(spec, &cfg), spec.seed, runs)
        })
        .collect();
    Ok(RunsOutcome { records, models })
}

/// Train on the full training set and test, over `spec.runs` runs.
pub fn run_test(
    spec: &ExperimentSpec,
    data: &Data,
    splits: usize,
    patch_size: usize,
) -> Result<RunsOutcome> {
    run_independent(
        spec,
        &data.train,
        &[EvalSet {
            name: "test",
            data: &data.test,
        }],
        splits,
        patch_size,
    )
}

/// Loads `<dir>/<name>/test_images.npy` and `test_labels.npy`.
pub fn load_corruption(spec: &ExperimentSpec, dir: &Path, name: &str) -> Result<LabeledDataset> {
    let sub = dir.join(name);
    let ds = load_npy_u8(sub.join("test_images.npy"), sub.join("test_labels.npy"))
        .with_context(|| format!("loading corruption '{name}' from {}", sub.display()))?;
    Ok(subset_test(spec, &ds))
}

/// Clean test accuracy plus accuracy on each corrupted test set, with models
/// trained on clean images. A corruption that fails to load is reported and
/// the others proceed.
pub fn run_robustness(
    spec: &ExperimentSpec,
    data: &Data,
    splits: usize,
    patch_size: usize,
) -> Result<RobustnessResult> {
    let mut loaded = Vec::new();
    let mut errors = Vec::new();
    for name in &spec.corruptions {
        let res = match &spec.corruption_dir {
            Some(dir) => load_corruption(spec, dir, name),
            None => Err(anyhow::anyhow!("no corruption directory given")),
        };
        match res {
            Ok(ds) => loaded.push((name.as_str(), ds)),
            Err(e) => {
                log::error!("{e:#}");
                errors.push(CorruptionError {
                    corruption: name.clone(),
                    message: format!("{e:#}"),
                });
            }
        }
    }
    let mut evals = vec![EvalSet {
        name: "test",
        data: &data.test,
    }];
    evals.extend(loaded.iter().map(|(name, ds)| EvalSet { name, data: ds }));
    let mut records = run_independent(spec, &data.train, &evals, splits, patch_size)?.records;
    let clean = records.remove(0);
    let cross_corruption = (!records.is_empty()).then(|| {
        Aggregate::of(
            &records
                .iter()
                .map(|r| r.eval_accuracy.mean)
                .collect::<Vec<_>>(),
        )
    });
    Ok(RobustnessResult {
        clean,
        corruptions: records,
        cross_corruption,
        errors,
    })
}

/// Figure settings: image grid, anchor pixel, dimension and seed.
#[derive(Debug, Clone)]
pub struct FigureSpec {
    pub width: usize,
    pub height: usize,
    pub anchor: (usize, usize),
    pub dim: usize,
    pub seed: u64,
    pub pgm: bool,
}

impl Default for FigureSpec {
    fn default() -> Self {
        Self {
            width: 28,
            height: 28,
            anchor: (21, 11),
            dim: 10_000,
            seed: 0,
            pgm: false,
        }
    }
}

/// Position mappings compared in the 2D figures: file stem and builder.
pub const FIGURE_MAPPINGS: [&str; 4] = ["orthogonal", "linear", "concatenation", "local_linear_s9"];

fn figure_memory(
    name: &str,
    levels: usize,
    dim: usize,
    rng: &mut RandomSource,
) -> Result<ItemMemory> {
    Ok(match name {
        "orthogonal" => build_orthogonal(rng, levels, dim)?,
        "linear" => build_linear(rng, levels, dim)?,
        "concatenation" => build_concatenation(rng, levels, 10.min(levels), dim)?,
        "local_linear_s9" => build_local_linear(rng, levels, 9.min(levels - 1), dim)?,
        other => bail!("unknown mapping {other}"),
    })
}

/// Similarity of every pixel's position vector `x ⊗ y` to the anchor's,
/// row-major (`grid[y][x]`). The x and y memories are independent.
pub fn position_similarity_grid(
    mx: &ItemMemory,
    my: &ItemMemory,
    anchor: (usize, usize),
) -> Result<Vec<Vec<f64>>> {
    let (ax, ay) = anchor;
    if ax >= mx.len() || ay >= my.len() {
        bail!(
            "anchor ({ax}, {ay}) outside the {}x{} grid",
            mx.len(),
            my.len()
        );
    }
    let a = mx.entries()[ax].bind(&my.entries()[ay])?;
    (0..my.len())
        .map(|y| {
            (0..mx.len())
                .map(|x| Ok(a.similarity(&mx.entries()[x].bind(&my.entries()[y])?)?))
                .collect()
        })
        .collect()
}

fn grid_csv(grid: &[Vec<f64>]) -> String {
    grid.iter()
        .map(|row| {
            row.iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(",")
                + "\n"
        })
        .collect()
}

fn grid_pgm(grid: &[Vec<f64>]) -> String {
    let mut out = format!("P2\n{} {}\n255\n", grid[0].len(), grid.len());
    for row in grid {
        let px: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * 255.0).round() as u8).to_string())
            .collect();
        out.push_str(&px.join(" "));
        out.push('\n');
    }
    out
}

fn profiles_csv(mem: &ItemMemory, anchors: &[usize]) -> Result<String> {
    let profiles = anchors
        .iter()
        .map(|&a| mem.similarity_profile(a))
        .collect::<hdc_poi::Result<Vec<_>>>()?;
    let mut out = String::from("level");
    for a in anchors {
        out.push_str(&format!(",anchor_{a}"));
    }
    out.push('\n');
    for level in 0..mem.len() {
        out.push_str(&level.to_string());
        for p in &profiles {
            out.push_str(&format!(",{:.6}", p[level]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes the figure data into `out_dir`:
///
/// * `position_<mapping>.csv` (and `.pgm`): per-pixel similarity to the
///   anchor for each mapping in [`FIGURE_MAPPINGS`];
/// * `profile_linear_l21.csv`: linear mapping, 21 levels, anchors 0 and 7;
/// * `profile_local_linear_l21_s4.csv`: local linear, 21 levels, 4 splits,
///   anchored at every split edge.
pub fn emit_similarity_figures(fig: &FigureSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (ax, ay) = fig.anchor;
    if ax >= fig.width || ay >= fig.height {
        bail!(
            "anchor ({ax}, {ay}) outside the {}x{} grid",
            fig.width,
            fig.height
        );
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let root = RandomSource::new(fig.seed);
    let mut written = Vec::new();
    let mut write = |name: String, text: String| -> Result<()> {
        let p = out_dir.join(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
        Ok(())
    };
    for name in FIGURE_MAPPINGS {
        let mx = figure_memory(
            name,
            fig.width,
            fig.dim,
            &mut root.named(&format!("{name}-x")),
        )?;
        let my = figure_memory(
            name,
            fig.height,
            fig.dim,
            &mut root.named(&format!("{name}-y")),
        )?;
        let grid = position_similarity_grid(&mx, &my, fig.anchor)?;
        write(format!("position_{name}.csv"), grid_csv(&grid))?;
        if fig.pgm {
            write(format!("position_{name}.pgm"), grid_pgm(&grid))?;
        }
    }
    let linear = build_linear(&mut root.named("profile-linear"), 21, fig.dim)?;
    write(
        "profile_linear_l21.csv".into(),
        profiles_csv(&linear, &[0, 7])?,
    )?;
    let local = build_local_linear(&mut root.named("profile-local-linear"), 21, 4, fig.dim)?;
    write(
        "profile_local_linear_l21_s4.csv".into(),
        profiles_csv(&local, &hdc_poi::mapping::split_edges(21, 4))?,
    )?;
    Ok(written)
}

/// Reads a figure grid CSV back.
pub fn read_grid_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(Into::into))
                .collect()
        })
        .collect()
}
