use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hdc_poi::dataset::{write_npy_u8, LabeledDataset};
use hdc_poi::encoding::ImageEncoder;
use hdc_poi::{load_model, save_model, RandomSource};
use hdc_poi_bench::spec::{Encoder, ExperimentSpec, PatchMap};
use hdc_poi_bench::{
    emit_similarity_figures, encode_all, render_table, run_cv_sweep, run_robustness, run_test,
    to_json, write_json, Data, FigureSpec,
};

#[derive(Parser)]
#[command(
    name = "hdc-bench",
    version,
    about = "Hyperdimensional image classification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validated sweep over every (splits, patch size) combination.
    Sweep(Common),
    /// Independent train and test runs for one configuration.
    Test {
        #[command(flatten)]
        common: Common,
        /// Save the model of the first run.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Clean and corrupted test accuracy for one configuration.
    Robustness(Common),
    /// Position-similarity grids and level profiles as CSV.
    Figures(FigureArgs),
    /// Encode a data split and dump the packed vectors as NPY.
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Split::Test)]
        split: Split,
    },
    /// Print a summary of a saved model.
    InspectModel { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
}

/// Experiment flags. Each overrides the matching key of `--config`.
#[derive(Args)]
struct Common {
    /// TOML experiment spec.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    #[arg(long)]
    corruption_dir: Option<PathBuf>,
    /// Corruption subdirectories, e.g. `shot_noise,motion_blur`.
    #[arg(long, value_delimiter = ',')]
    corruptions: Option<Vec<String>>,
    #[arg(long, value_enum)]
    encoder: Option<Encoder>,
    /// Split counts; a value equal to the image side means orthogonal.
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    patch_size: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    patch_mapping: Option<PatchMap>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// Training samples per class.
    #[arg(long)]
    subset: Option<usize>,
    /// Test samples per class.
    #[arg(long)]
    test_subset: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    check_interval: Option<usize>,
    #[arg(long)]
    stop_threshold: Option<f64>,
    /// Output path (JSON file, or directory for `encode`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut s = match &self.config {
            Some(p) => ExperimentSpec::load(p)?,
            None => ExperimentSpec::default(),
        };
        macro_rules! set {
            ($($f:ident => $t:ident),*) => {$(
                if let Some(v) = &self.$f {
                    s.$t = v.clone();
                }
            )*};
        }
        set!(dataset_dir => dataset_dir, corruptions => corruptions, encoder => encoder, splits => splits,
             patch_size => patch_sizes, patch_mapping => patch_mapping, dim => dim, threshold => threshold,
             seed => seed, runs => runs, folds => folds, max_iters => max_iters,
             check_interval => check_interval, stop_threshold => stop_threshold);
        if self.corruption_dir.is_some() {
            s.corruption_dir = self.corruption_dir.clone();
        }
        if self.subset.is_some() {
            s.subset = self.subset;
        }
        if self.test_subset.is_some() {
            s.test_subset = self.test_subset;
        }
        if self.out.is_some() {
            s.out = self.out.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 21)]
    anchor_x: usize,
    #[arg(long, default_value_t = 11)]
    anchor_y: usize,
    /// Also write grayscale PGM images.
    #[arg(long)]
    pgm: bool,
}

fn single(spec: &ExperimentSpec) -> Result<(usize, usize)> {
    match spec.combinations()[..] {
        [one] => Ok(one),
        _ => bail!("this command takes exactly one split count and one patch size"),
    }
}

fn emit<T: serde::Serialize>(spec: &ExperimentSpec, value: &T) -> Result<()> {
    match &spec.out {
        Some(p) => {
            write_json(p, value)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{}", to_json(value)),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Sweep(c) => {
            let spec = c.spec()?;
            let data = Data::load(&spec)?;
            let res = run_cv_sweep(&spec, &data)?;
            eprint!("{}", render_table(&res.records));
            if let Some(b) = res.best {
                let r = &res.records[b];
                eprintln!("best: S={} z={}", r.config.splits, r.config.patch_size);
            }
            emit(&spec, &res)
        }
        Command::Test { common, model_out } => {
            let spec = common.spec()?;
            let (s, z) = single(&spec)?;
            let data = Data::load(&spec)?;
            let out = run_test(&spec, &data, s, z)?;
            eprint!("{}", render_table(&out.records));
            if let Some(p) = model_out {
                save_model(&out.models[0], &p)
                    .with_context(|| format!("saving {}", p.display()))?;
                eprintln!("wrote {}", p.display());
            }
            emit(&spec, &out.records[0])
        }
        Command::Robustness(c) => {
            let spec = c.spec()?;
            let (s, z) = single(&spec)?;
            let data = Data::load(&spec)?;
            let res = run_robustness(&spec, &data, s, z)?;
            let mut all = vec![res.clean.clone()];
            all.extend(res.corruptions.iter().cloned());
            eprint!("{}", render_table(&all));
            if let Some(a) = &res.cross_corruption {
                eprintln!(
                    "average across corruptions: {:.2} (± {:.2})",
                    100.0 * a.mean,
                    100.0 * a.std
                );
            }
            emit(&spec, &res)
        }
        Command::Figures(f) => {
            let fig = FigureSpec {
                anchor: (f.anchor_x, f.anchor_y),
                dim: f.dim,
                seed: f.seed,
                pgm: f.pgm,
                ..FigureSpec::default()
            };
            for p in emit_similarity_figures(&fig, &f.out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Encode { common, split } => {
            let spec = common.spec()?;
            let (s, z) = single(&spec)?;
            let data = Data::load(&spec)?;
            let ds: &LabeledDataset = match split {
                Split::Train => &data.train,
                Split::Test => &data.test,
            };
            let Some((w, h)) = ds.image_size() else {
                bail!("dataset is empty");
            };
            let rng = RandomSource::new(spec.seed);
            let encoder =
                ImageEncoder::new(spec.encoder_config(s, z), w, h, &rng.named("memories"))?;
            let name = match split {
                Split::Train => "encode-train",
                Split::Test => "encode-test",
            };
            let xs = encode_all(&encoder, ds, &rng.named(name))?;
            let dir = spec.out.clone().unwrap_or_else(|| PathBuf::from("encoded"));
            std::fs::create_dir_all(&dir)?;
            let row = spec.dim.div_ceil(8);
            let bytes: Vec<u8> = xs.iter().flat_map(|v| v.to_packed_bytes()).collect();
            write_npy_u8(dir.join("vectors.npy"), &[xs.len(), row], &bytes)?;
            let labels: Vec<u8> = ds.labels.iter().map(|&l| l as u8).collect();
            write_npy_u8(dir.join("labels.npy"), &[labels.len()], &labels)?;
            println!(
                "{} vectors of {} bits -> {}",
                xs.len(),
                spec.dim,
                dir.display()
            );
            Ok(())
        }
        Command::InspectModel { path } => {
            let m = load_model(&path).with_context(|| format!("loading {}", path.display()))?;
            println!(
                "dim {}  classes {}  seed {}",
                m.dim(),
                m.class_count(),
                m.seed()
            );
            println!("{:>6} {:>8} {:>10}", "label", "n", "ones");
            for ((l, b), p) in m.labels().iter().zip(m.bundles()).zip(m.prototypes()) {
                println!("{:>6} {:>8} {:>10}", l, b.n(), p.count_ones());
            }
            println!("prototype similarity:");
            for p in m.prototypes() {
                let row: Vec<String> = m
                    .prototypes()
                    .iter()
                    .map(|q| format!("{:.3}", p.similarity(q).unwrap_or(f64::NAN)))
                    .collect();
                println!("  {}", row.join(" "));
            }
            Ok(())
        }
    }
}
