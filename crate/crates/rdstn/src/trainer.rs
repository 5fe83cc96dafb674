//! Training orchestration: preloading, the step loop, periodic held-out
//! evaluation, and best/last checkpoint persistence.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rdstn_core::config::{DecoderConfig, EncoderConfig, TrainConfig};
use rdstn_core::image::Image;
use rdstn_core::metrics::{psnr, Psnr};
use rdstn_core::model::RdstnModel;
use rdstn_core::optim::Adam;
use rdstn_core::resample::resize_bicubic;
use rdstn_core::train::train_step;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, EvalPoint, MetricRecord};
use crate::dataset::DatasetSplit;
use crate::error::{io_err, AppError, AppResult};
use crate::loader::PairLoader;
use crate::png_io::load_image_as;

/// Images used for the quick held-out check between steps; the full
/// benchmark goes through the eval harness instead.
const EVAL_IMAGE_CAP: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<MetricRecord>,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug)]
pub struct FitOutcome {
    pub best_path: PathBuf,
    pub last_path: PathBuf,
    pub metrics_path: PathBuf,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub best_psnr: Option<f64>,
    pub loss_trace: Vec<f64>,
}

fn preload(paths: &[PathBuf], channels: usize) -> AppResult<(Vec<Arc<Image<f32>>>, usize)> {
    let mut images = Vec::with_capacity(paths.len());
    let mut skipped = 0;
    for p in paths {
        match load_image_as::<f32>(p, channels) {
            Ok(img) => images.push(Arc::new(img)),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", p.display());
                skipped += 1;
            }
        }
    }
    Ok((images, skipped))
}

/// Mean PSNR of the model over `images` at `scale` (LR side = dim/scale,
/// upscaled back to the original size).
fn quick_eval(model: &RdstnModel<f32>, images: &[Arc<Image<f32>>], scale: f64, query_batch: usize) -> AppResult<EvalPoint> {
    let mut dbs = Vec::new();
    let mut identical = 0usize;
    for img in images {
        let lh = ((img.height() as f64 / scale).round() as usize).max(1);
        let lw = ((img.width() as f64 / scale).round() as usize).max(1);
        let lr = resize_bicubic(img, lh, lw)?;
        let sr = model.upscale(&lr, img.height(), img.width(), true, query_batch)?;
        match psnr(&sr, img)? {
            Psnr::Db(db) => dbs.push(db),
            Psnr::Identical => identical += 1,
        }
    }
    if dbs.is_empty() {
        return Ok(EvalPoint { scale, psnr_db: if identical > 0 { None } else { Some(f64::NAN) } });
    }
    Ok(EvalPoint { scale, psnr_db: Some(dbs.iter().sum::<f64>() / dbs.len() as f64) })
}

fn eval_summary(points: &[EvalPoint]) -> Option<f64> {
    let finite: Vec<f64> = points.iter().filter_map(|p| p.psnr_db).filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        // all-identical outputs count as unbeatable
        if points.iter().any(|p| p.psnr_db.is_none()) {
            return Some(f64::INFINITY);
        }
        return None;
    }
    Some(finite.iter().sum::<f64>() / finite.len() as f64)
}

/// Runs the continuous-scale training loop and persists `best.ckpt`,
/// `last.ckpt` and `metrics.json` under `out_dir`. `resume` continues a run
/// from its `last.ckpt` (the subsequent loss trace is identical to an
/// uninterrupted run with the same config).
pub fn fit(
    enc_cfg: &EncoderConfig,
    dec_cfg: &DecoderConfig,
    train_cfg: &TrainConfig,
    split: &DatasetSplit,
    out_dir: &Path,
    resume: Option<&Path>,
) -> AppResult<FitOutcome> {
    enc_cfg.validate()?;
    dec_cfg.validate()?;
    train_cfg.validate()?;
    if split.train.is_empty() {
        return Err(AppError::EmptyDataset(split.data_dir.clone()));
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let (train_images, _) = preload(&split.train_paths(), enc_cfg.channels)?;
    if train_images.is_empty() {
        return Err(AppError::EmptyDataset(split.data_dir.clone()));
    }
    let (eval_images, _) = preload(
        &split.test_paths()[..split.test.len().min(EVAL_IMAGE_CAP)],
        enc_cfg.channels,
    )?;
    let train_images = Arc::new(train_images);

    let (mut model, mut opt, start_step, mut records, mut best_psnr) = match resume {
        Some(path) => {
            let ckpt = Checkpoint::load(path)?;
            ckpt.verify_configs(enc_cfg, dec_cfg)?;
            let model = ckpt.into_model()?;
            let opt = ckpt
                .restore_optimizer(&model)?
                .ok_or_else(|| AppError::ConfigMismatch(format!(
                    "{} carries no optimizer state; resume needs a 'last' checkpoint",
                    path.display()
                )))?;
            (model, opt, ckpt.meta.step, ckpt.meta.metrics.clone(), ckpt.meta.best_psnr)
        }
        None => {
            let model = RdstnModel::new(enc_cfg.clone(), dec_cfg.clone(), train_cfg.seed)
                .map_err(AppError::from)?;
            let opt = Adam::new(model.store());
            (model, opt, 0, Vec::new(), None)
        }
    };
    if start_step >= train_cfg.steps {
        return Err(AppError::InvalidArgument(format!(
            "checkpoint is already at step {start_step} of {}",
            train_cfg.steps
        )));
    }

    let batch = train_cfg.batch;
    let mut loader = PairLoader::new(
        train_images,
        train_cfg,
        (start_step * batch) as u64,
        (train_cfg.steps * batch) as u64,
    );

    let best_path = out_dir.join("best.ckpt");
    let last_path = out_dir.join("last.ckpt");
    let metrics_path = out_dir.join("metrics.json");
    let eval_every = if train_cfg.eval_every == 0 { train_cfg.steps } else { train_cfg.eval_every };

    let mut loss_trace = Vec::with_capacity(train_cfg.steps - start_step);
    for step in start_step..train_cfg.steps {
        let mut pairs = Vec::with_capacity(batch);
        for _ in 0..batch {
            pairs.push(loader.next_pair()?);
        }
        let lr = train_cfg.lr_at(step) as f32;
        let loss = train_step(&mut model, &pairs, &mut opt, lr, step)? as f64;
        loss_trace.push(loss);

        let is_last = step + 1 == train_cfg.steps;
        if (step + 1) % eval_every == 0 || is_last {
            let mut eval = Vec::new();
            if !eval_images.is_empty() {
                for &scale in &train_cfg.eval_scales {
                    eval.push(quick_eval(&model, &eval_images, scale, train_cfg.query_batch)?);
                }
            }
            records.push(MetricRecord { step: step + 1, train_loss: Some(loss), eval: eval.clone() });
            let summary = eval_summary(&eval);
            let improved = match (summary, best_psnr) {
                (Some(s), Some(b)) => s > b,
                (Some(_), None) => true,
                (None, _) => best_psnr.is_none(), // no eval set: latest wins once
            };
            if improved {
                best_psnr = summary.or(best_psnr);
                Checkpoint::from_model(
                    &model,
                    Some(train_cfg.clone()),
                    step + 1,
                    records.clone(),
                    best_psnr,
                    None,
                )
                .save(&best_path)?;
            }
            Checkpoint::from_model(
                &model,
                Some(train_cfg.clone()),
                step + 1,
                records.clone(),
                best_psnr,
                Some(&opt),
            )
            .save(&last_path)?;
        }
    }

    let log = TrainLog { records, loss_trace: loss_trace.clone() };
    std::fs::write(&metrics_path, serde_json::to_string_pretty(&log)?).map_err(io_err(&metrics_path))?;

    if !best_path.exists() {
        // eval never ran (empty test split): best mirrors last
        Checkpoint::from_model(&model, Some(train_cfg.clone()), train_cfg.steps, log.records.clone(), best_psnr, None)
            .save(&best_path)?;
    }

    Ok(FitOutcome {
        best_path,
        last_path,
        metrics_path,
        initial_loss: *loss_trace.first().expect("at least one step"),
        final_loss: *loss_trace.last().expect("at least one step"),
        best_psnr,
        loss_trace,
    })
}
