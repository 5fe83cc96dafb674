//! Scale sweeps, noise robustness and cross-dataset generalization: the
//! Table-1/2/3-shaped benchmark protocol.
//!
//! Per test image and scale: synthesize the LR input by bicubic
//! downsampling (side = dim / scale), optionally corrupt it with Gaussian
//! noise, super-resolve back to the exact original size, and score PSNR
//! against the original. Cells aggregate the per-image mean.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rdstn_core::image::{add_gaussian_noise, Image};
use rdstn_core::metrics::{psnr, Psnr};
use rdstn_core::model::RdstnModel;
use rdstn_core::resample::resize_bicubic;
use rdstn_core::rng::{stream_rng, Stream};
use serde::{Deserialize, Serialize};

use crate::dataset::list_images;
use crate::error::{AppError, AppResult};
use crate::png_io::load_image_as;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bicubic,
    Rdstn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bicubic => "bicubic",
            Method::Rdstn => "rdstn",
        }
    }

    pub fn parse(s: &str) -> AppResult<Vec<Method>> {
        match s.to_ascii_lowercase().as_str() {
            "bicubic" => Ok(vec![Method::Bicubic]),
            "rdstn" => Ok(vec![Method::Rdstn]),
            "both" => Ok(vec![Method::Bicubic, Method::Rdstn]),
            other => Err(AppError::InvalidArgument(format!(
                "unknown method '{other}' (expected bicubic, rdstn or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Gaussian noise std added to the LR input (0 = clean protocol).
    pub sigma: f64,
    /// Seed for the per-image noise streams.
    pub noise_seed: u64,
    /// Decoder query batch (memory bound).
    pub query_batch: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { sigma: 0.0, noise_seed: 0, query_batch: 16384 }
    }
}

/// One (method, scale) cell. The method is a free-form label so ablation
/// reports can carry S1..S4 rows through the same table shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub method: String,
    pub scale: f64,
    /// Mean PSNR over images with finite PSNR; `None` when every image
    /// reproduced exactly (flagged "identical").
    pub psnr_db: Option<f64>,
    /// Images whose SR output matched the ground truth bit-for-bit.
    pub identical: usize,
    pub n_images: usize,
}

impl Cell {
    /// Ranking value: identical cells beat any finite dB.
    pub fn rank_db(&self) -> f64 {
        self.psnr_db.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub dataset_id: String,
    pub split_seed: Option<u64>,
    pub checkpoint_id: Option<String>,
    pub sigma: f64,
    /// Unreadable inputs skipped during loading.
    pub skipped: usize,
    /// Canonically ordered by (method, scale).
    pub rows: Vec<Cell>,
}

/// PSNR of one method on one image at one scale, under the shared
/// LR-synthesis protocol.
pub fn sr_psnr_single(
    model: Option<&RdstnModel<f32>>,
    method: Method,
    hr: &Image<f32>,
    lr: &Image<f32>,
    opts: &SweepOptions,
) -> AppResult<Psnr> {
    let (h, w) = (hr.height(), hr.width());
    let sr = match method {
        Method::Bicubic => resize_bicubic(lr, h, w)?,
        Method::Rdstn => {
            let model = model.ok_or_else(|| {
                AppError::InvalidArgument("method 'rdstn' needs a checkpoint".into())
            })?;
            model.upscale(lr, h, w, true, opts.query_batch)?
        }
    };
    Ok(psnr(&sr, hr)?)
}

fn load_eval_images(
    paths: &[PathBuf],
    channels: usize,
) -> (Vec<Image<f32>>, usize) {
    let mut images = Vec::new();
    let mut skipped = 0;
    for p in paths {
        match load_image_as::<f32>(p, channels) {
            Ok(img) => images.push(img),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", p.display());
                skipped += 1;
            }
        }
    }
    (images, skipped)
}

/// Runs the sweep over pre-listed image paths. Rows come back in canonical
/// (method, scale) order; per-image work is parallel but the aggregation
/// order is fixed.
pub fn eval_scale_sweep(
    model: Option<&RdstnModel<f32>>,
    methods: &[Method],
    image_paths: &[PathBuf],
    scales: &[f64],
    opts: &SweepOptions,
) -> AppResult<(Vec<Cell>, usize)> {
    if image_paths.is_empty() {
        return Err(AppError::EmptyDataset(PathBuf::from("<no images>")));
    }
    if let Some(bad) = scales.iter().find(|s| **s < 1.0) {
        return Err(AppError::InvalidArgument(format!("scales must be >= 1, got {bad}")));
    }
    if opts.sigma < 0.0 {
        return Err(AppError::InvalidArgument("noise sigma must be >= 0".into()));
    }
    let channels = model.map(|m| m.encoder_config().channels).unwrap_or(1);
    let (images, skipped) = load_eval_images(image_paths, channels);
    if images.is_empty() {
        return Err(AppError::EmptyDataset(image_paths[0].clone()));
    }

    // per image: Vec<(method_idx, scale_idx, Psnr)>
    let per_image: Vec<AppResult<Vec<(usize, usize, Psnr)>>> = images
        .par_iter()
        .enumerate()
        .map(|(img_idx, hr)| {
            let mut out = Vec::with_capacity(methods.len() * scales.len());
            for (si, &scale) in scales.iter().enumerate() {
                let lh = ((hr.height() as f64 / scale).round() as usize).max(1);
                let lw = ((hr.width() as f64 / scale).round() as usize).max(1);
                let mut lr = resize_bicubic(hr, lh, lw)?;
                if opts.sigma > 0.0 {
                    let stream_idx = (img_idx as u64) * 4096 + si as u64;
                    let mut rng = stream_rng(opts.noise_seed, Stream::Noise, stream_idx);
                    lr = add_gaussian_noise(&lr, opts.sigma as f32, &mut rng)?;
                }
                for (mi, &method) in methods.iter().enumerate() {
                    out.push((mi, si, sr_psnr_single(model, method, hr, &lr, opts)?));
                }
            }
            Ok(out)
        })
        .collect();

    let mut cells: Vec<Cell> = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (si, &scale) in scales.iter().enumerate() {
            let mut dbs = Vec::new();
            let mut identical = 0usize;
            for result in &per_image {
                let rows = result.as_ref().map_err(|e| AppError::Internal(e.to_string()))?;
                for &(m, s, p) in rows {
                    if m == mi && s == si {
                        match p {
                            Psnr::Db(db) => dbs.push(db),
                            Psnr::Identical => identical += 1,
                        }
                    }
                }
            }
            let n_images = dbs.len() + identical;
            let psnr_db = if dbs.is_empty() {
                None
            } else {
                Some(dbs.iter().sum::<f64>() / dbs.len() as f64)
            };
            cells.push(Cell { method: method.name().to_string(), scale, psnr_db, identical, n_images });
        }
    }
    Ok((cells, skipped))
}

/// Cross-dataset protocol: every readable image in `dir` is a test image.
pub fn generalization_eval(
    model: Option<&RdstnModel<f32>>,
    methods: &[Method],
    dir: &Path,
    scales: &[f64],
    opts: &SweepOptions,
) -> AppResult<BenchmarkTable> {
    let names = list_images(dir)?;
    if names.is_empty() {
        return Err(AppError::EmptyDataset(dir.to_path_buf()));
    }
    let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    let (rows, skipped) = eval_scale_sweep(model, methods, &paths, scales, opts)?;
    Ok(BenchmarkTable {
        dataset_id: dir.display().to_string(),
        split_seed: None,
        checkpoint_id: None,
        sigma: opts.sigma,
        skipped,
        rows,
    })
}
