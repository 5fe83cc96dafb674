//! `rdstn` command-line interface: dataset splitting, training, benchmark
//! sweeps, ablation batches and single-image arbitrary-scale upscaling.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rdstn_core::config::{
    apply_ablation_setting, AblationSetting, DecoderConfig, EncoderConfig, TrainConfig,
};
use rdstn_core::model::RdstnModel;
use serde::{Deserialize, Serialize};

use rdstn::checkpoint::Checkpoint;
use rdstn::dataset::{split_dataset, DatasetSplit};
use rdstn::error::{io_err, AppError, AppResult};
use rdstn::eval::{eval_scale_sweep, generalization_eval, BenchmarkTable, Method, SweepOptions};
use rdstn::png_io::{load_image_as, save_image};
use rdstn::report::{write_csv, write_json};
use rdstn::resolve_data_path;
use rdstn::trainer::fit;

#[derive(Parser)]
#[command(
    name = "rdstn",
    about = "Arbitrary-scale ultrasound image super-resolution: training, evaluation and upscaling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a dataset directory into train/test and write a JSON manifest.
    Split(SplitArgs),
    /// Train a model from a config file (flags override config keys).
    Train(TrainArgs),
    /// Benchmark PSNR over a scale sweep and emit report.csv/report.json.
    Eval(EvalArgs),
    /// Upscale a single image by a real factor or to an explicit size.
    Upscale(UpscaleArgs),
    /// Train all four ablation settings (S1..S4) and emit a combined report.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct SplitArgs {
    /// Directory of PNG images.
    #[arg(long)]
    data_dir: PathBuf,
    /// Fraction of images assigned to the training split.
    #[arg(long, default_value_t = 0.8)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output manifest path.
    #[arg(long, default_value = "manifest.json")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct TrainOverrides {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    patch: Option<usize>,
    #[arg(long)]
    k_samples: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scale_min: Option<f64>,
    #[arg(long)]
    scale_max: Option<f64>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    loader_workers: Option<usize>,
    #[arg(long)]
    augment_flips: Option<bool>,
    /// Ablation setting (S1..S4); governs the LFF/GFF flags.
    #[arg(long)]
    ablation: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    blocks_per_stage: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    /// Dataset directory (splits with the training seed when no manifest).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Split manifest produced by `rdstn split`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    split_ratio: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML or JSON config file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "runs/train")]
    out_dir: PathBuf,
    /// Resume from a `last.ckpt` (must carry optimizer state).
    #[arg(long)]
    resume: Option<PathBuf>,
    #[command(flatten)]
    overrides: TrainOverrides,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to evaluate (optional for `--method bicubic`).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Manifest whose test split is evaluated.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Foreign dataset directory: every image is a test image (the
    /// generalization protocol).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Comma-separated scale list, e.g. "1.6,2,4".
    #[arg(long, default_value = "2,3,4")]
    scales: String,
    /// Gaussian noise std added to LR inputs.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// bicubic, rdstn or both.
    #[arg(long, default_value = "both")]
    method: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Decoder query batch size (memory bound).
    #[arg(long, default_value_t = 16384)]
    query_batch: usize,
}

#[derive(Args)]
struct UpscaleArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Real factor ("2.5") or explicit size ("250x200").
    #[arg(long)]
    scale: String,
    #[arg(long)]
    output: PathBuf,
    /// Decode with the single nearest code instead of the local ensemble
    /// (exhibits the chessboard artifacts the ensemble removes).
    #[arg(long)]
    no_ensemble: bool,
    #[arg(long, default_value_t = 16384)]
    query_batch: usize,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "runs/ablation")]
    out_dir: PathBuf,
    /// Scales for the combined Table-2-shaped report.
    #[arg(long, default_value = "2,3,4")]
    scales: String,
    #[command(flatten)]
    overrides: TrainOverrides,
}

// ---------------------------------------------------------------------------
// config file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct DataSection {
    data_dir: Option<PathBuf>,
    manifest: Option<PathBuf>,
    split_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct ConfigFile {
    train: TrainConfig,
    encoder: EncoderConfig,
    decoder: DecoderConfig,
    data: DataSection,
}

fn load_config(path: &Path) -> AppResult<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let is_json = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    }
}

fn apply_overrides(cfg: &mut ConfigFile, ov: &TrainOverrides) -> AppResult<()> {
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src.clone() {
                $dst = v;
            }
        };
    }
    set!(cfg.train.steps, ov.steps);
    set!(cfg.train.batch, ov.batch);
    set!(cfg.train.patch, ov.patch);
    set!(cfg.train.k_samples, ov.k_samples);
    set!(cfg.train.lr, ov.lr);
    set!(cfg.train.seed, ov.seed);
    set!(cfg.train.scale_min, ov.scale_min);
    set!(cfg.train.scale_max, ov.scale_max);
    set!(cfg.train.eval_every, ov.eval_every);
    set!(cfg.train.loader_workers, ov.loader_workers);
    set!(cfg.train.augment_flips, ov.augment_flips);
    if let Some(s) = &ov.ablation {
        cfg.train.ablation = AblationSetting::parse(s).map_err(|e| AppError::Config(e.to_string()))?;
    }
    set!(cfg.encoder.dim, ov.dim);
    set!(cfg.encoder.stages, ov.stages);
    set!(cfg.encoder.blocks_per_stage, ov.blocks_per_stage);
    set!(cfg.encoder.window, ov.window);
    set!(cfg.encoder.heads, ov.heads);
    if ov.data_dir.is_some() {
        cfg.data.data_dir = ov.data_dir.clone();
    }
    if ov.manifest.is_some() {
        cfg.data.manifest = ov.manifest.clone();
    }
    if ov.split_ratio.is_some() {
        cfg.data.split_ratio = ov.split_ratio;
    }
    Ok(())
}

fn resolve_split(cfg: &ConfigFile) -> AppResult<DatasetSplit> {
    if let Some(manifest) = &cfg.data.manifest {
        return DatasetSplit::load(&resolve_data_path(manifest));
    }
    let Some(dir) = &cfg.data.data_dir else {
        return Err(AppError::Config("config needs data.manifest or data.data_dir".into()));
    };
    let ratio = cfg.data.split_ratio.unwrap_or(0.8);
    split_dataset(&resolve_data_path(dir), ratio, cfg.train.seed)
}

fn parse_scales(s: &str) -> AppResult<Vec<f64>> {
    let scales: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let scales = scales.map_err(|e| AppError::InvalidArgument(format!("bad scale list '{s}': {e}")))?;
    if scales.is_empty() {
        return Err(AppError::InvalidArgument("scale list is empty".into()));
    }
    Ok(scales)
}

enum ScaleSpec {
    Factor(f64),
    Size(usize, usize),
}

fn parse_scale_spec(s: &str) -> AppResult<ScaleSpec> {
    if let Some((h, w)) = s.split_once(['x', 'X']) {
        let h = h.trim().parse::<usize>();
        let w = w.trim().parse::<usize>();
        if let (Ok(h), Ok(w)) = (h, w) {
            if h == 0 || w == 0 {
                return Err(AppError::InvalidArgument("target size must be positive".into()));
            }
            return Ok(ScaleSpec::Size(h, w));
        }
        return Err(AppError::InvalidArgument(format!("bad size '{s}', expected HxW")));
    }
    let f = s
        .trim()
        .parse::<f64>()
        .map_err(|e| AppError::InvalidArgument(format!("bad scale '{s}': {e}")))?;
    if f <= 0.0 {
        return Err(AppError::InvalidArgument("scale factor must be positive".into()));
    }
    Ok(ScaleSpec::Factor(f))
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_split(args: &SplitArgs) -> AppResult<Vec<PathBuf>> {
    let dir = resolve_data_path(&args.data_dir);
    let split = split_dataset(&dir, args.ratio, args.seed)?;
    split.save(&args.out)?;
    println!("split {} images: {} train / {} test", split.train.len() + split.test.len(), split.train.len(), split.test.len());
    Ok(vec![args.out.clone()])
}

fn cmd_train(args: &TrainArgs) -> AppResult<Vec<PathBuf>> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides)?;
    let enc = apply_ablation_setting(cfg.train.ablation, &cfg.encoder);
    let split = resolve_split(&cfg)?;
    std::fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;
    let split_path = args.out_dir.join("split.json");
    split.save(&split_path)?;

    let model = RdstnModel::<f32>::new(enc.clone(), cfg.decoder.clone(), cfg.train.seed)?;
    println!(
        "training {} ({} parameters) for {} steps on {} images",
        cfg.train.ablation.name(),
        model.count_parameters(),
        cfg.train.steps,
        split.train.len()
    );
    drop(model);

    let outcome = fit(&enc, &cfg.decoder, &cfg.train, &split, &args.out_dir, args.resume.as_deref())?;
    println!(
        "initial loss {:.5}, final loss {:.5}{}",
        outcome.initial_loss,
        outcome.final_loss,
        outcome
            .best_psnr
            .map(|p| format!(", best held-out PSNR {p:.2} dB"))
            .unwrap_or_default()
    );
    Ok(vec![outcome.best_path, outcome.last_path, outcome.metrics_path, split_path])
}

fn load_model(path: &Path) -> AppResult<(RdstnModel<f32>, String)> {
    let ckpt = Checkpoint::load(path)?;
    let id = format!("{}@step{}", path.display(), ckpt.meta.step);
    Ok((ckpt.into_model()?, id))
}

fn cmd_eval(args: &EvalArgs) -> AppResult<Vec<PathBuf>> {
    let methods = Method::parse(&args.method)?;
    let scales = parse_scales(&args.scales)?;
    let needs_model = methods.contains(&Method::Rdstn);
    let loaded = match (&args.checkpoint, needs_model) {
        (Some(p), _) => Some(load_model(p)?),
        (None, true) => {
            return Err(AppError::InvalidArgument(
                "method 'rdstn' needs --checkpoint (use --method bicubic without one)".into(),
            ))
        }
        (None, false) => None,
    };
    let model = loaded.as_ref().map(|(m, _)| m);
    let checkpoint_id = loaded.as_ref().map(|(_, id)| id.clone());
    let opts = SweepOptions { sigma: args.sigma, noise_seed: 0, query_batch: args.query_batch };

    let table = match (&args.manifest, &args.data_dir) {
        (Some(manifest), None) => {
            let split = DatasetSplit::load(&resolve_data_path(manifest))?;
            let (rows, skipped) = eval_scale_sweep(model, &methods, &split.test_paths(), &scales, &opts)?;
            BenchmarkTable {
                dataset_id: split.data_dir.display().to_string(),
                split_seed: Some(split.seed),
                checkpoint_id,
                sigma: args.sigma,
                skipped,
                rows,
            }
        }
        (None, Some(dir)) => {
            let mut table = generalization_eval(model, &methods, &resolve_data_path(dir), &scales, &opts)?;
            table.checkpoint_id = checkpoint_id;
            table
        }
        _ => {
            return Err(AppError::InvalidArgument(
                "pass exactly one of --manifest or --data-dir".into(),
            ))
        }
    };

    std::fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;
    let csv = args.out_dir.join("report.csv");
    let json = args.out_dir.join("report.json");
    write_csv(&table, &csv)?;
    write_json(&table, &json)?;
    for row in &table.rows {
        let db = row.psnr_db.map(|v| format!("{v:.2}")).unwrap_or_else(|| "inf".into());
        println!("{:>8} x{:<5} {db} dB ({} images)", row.method, row.scale, row.n_images);
    }
    Ok(vec![csv, json])
}

fn cmd_upscale(args: &UpscaleArgs) -> AppResult<Vec<PathBuf>> {
    let (model, _) = load_model(&args.checkpoint)?;
    let img = load_image_as::<f32>(&resolve_data_path(&args.input), model.encoder_config().channels)?;
    let (th, tw) = match parse_scale_spec(&args.scale)? {
        ScaleSpec::Factor(f) => (
            ((img.height() as f64 * f).round() as usize).max(1),
            ((img.width() as f64 * f).round() as usize).max(1),
        ),
        ScaleSpec::Size(h, w) => (h, w),
    };
    let out = model.upscale(&img, th, tw, !args.no_ensemble, args.query_batch)?;
    save_image(&out, &args.output)?;
    println!("{}x{} -> {}x{} ({})", img.height(), img.width(), th, tw, args.output.display());
    Ok(vec![args.output.clone()])
}

fn cmd_ablate(args: &AblateArgs) -> AppResult<Vec<PathBuf>> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides)?;
    let scales = parse_scales(&args.scales)?;
    let split = resolve_split(&cfg)?;
    std::fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;

    let mut artifacts = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for setting in AblationSetting::ALL {
        let enc = apply_ablation_setting(setting, &cfg.encoder);
        let sub = args.out_dir.join(setting.name());
        let mut run = || -> AppResult<()> {
            let outcome = fit(&enc, &cfg.decoder, &cfg.train, &split, &sub, None)?;
            let (model, _) = load_model(&outcome.best_path)?;
            let (mut cells, _) =
                eval_scale_sweep(Some(&model), &[Method::Rdstn], &split.test_paths(), &scales, &SweepOptions {
                    sigma: 0.0,
                    noise_seed: 0,
                    query_batch: cfg.train.query_batch,
                })?;
            for cell in &mut cells {
                cell.method = setting.name().to_string();
            }
            rows.extend(cells);
            artifacts.push(outcome.best_path);
            artifacts.push(outcome.last_path);
            Ok(())
        };
        match run() {
            Ok(()) => println!("{} complete", setting.name()),
            Err(e) => {
                eprintln!("warning: setting {} failed: {e}", setting.name());
                failures.push(setting.name());
            }
        }
    }

    if !rows.is_empty() {
        let table = BenchmarkTable {
            dataset_id: split.data_dir.display().to_string(),
            split_seed: Some(split.seed),
            checkpoint_id: None,
            sigma: 0.0,
            skipped: 0,
            rows,
        };
        let csv = args.out_dir.join("report.csv");
        let json = args.out_dir.join("report.json");
        write_csv(&table, &csv)?;
        write_json(&table, &json)?;
        artifacts.push(csv);
        artifacts.push(json);
    }
    if !failures.is_empty() {
        return Err(AppError::Internal(format!("ablation settings failed: {}", failures.join(", "))));
    }
    Ok(artifacts)
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Upscale(args) => cmd_upscale(args),
        Command::Ablate(args) => cmd_ablate(args),
    };
    match result {
        Ok(artifacts) => {
            for p in artifacts {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
