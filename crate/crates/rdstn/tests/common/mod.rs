//! Shared fixtures for the integration and acceptance suites: synthetic
//! ultrasound-ish textures and toy configs sized for CPU runs.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::Rng;
use rdstn_core::config::{DecoderConfig, EncoderConfig, TrainConfig};
use rdstn_core::image::Image;
use rdstn_core::real::Real;
use rdstn_core::rng::{stream_rng, Stream};

/// Deterministic texture with sharp region boundaries, directional stripes
/// and speckle: content bicubic handles poorly but a small implicit model
/// can memorize.
pub fn synth_texture<T: Real>(side: usize, seed: u64) -> Image<T> {
    let mut rng = stream_rng(seed, Stream::Init, 4242);
    let n_blobs = 6;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..n_blobs)
        .map(|_| {
            (
                rng.gen_range(0.0..side as f64),
                rng.gen_range(0.0..side as f64),
                rng.gen_range(side as f64 / 8.0..side as f64 / 3.0),
                rng.gen_range(-1.0f64..1.0),
            )
        })
        .collect();
    let stripe_angle = rng.gen_range(0.0..std::f64::consts::PI);
    let stripe_freq = 2.0 * std::f64::consts::PI / rng.gen_range(5.5..7.5);
    let (ca, sa) = (stripe_angle.cos(), stripe_angle.sin());

    let mut data = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let (yf, xf) = (y as f64, x as f64);
            let mut field = 0.0;
            for &(by, bx, r, amp) in &blobs {
                let d2 = (yf - by).powi(2) + (xf - bx).powi(2);
                field += amp * (-d2 / (r * r)).exp();
            }
            // threshold the blob field into piecewise-constant regions
            let region = if field > 0.15 {
                0.75
            } else if field < -0.15 {
                0.25
            } else {
                0.5
            };
            let stripes = 0.18 * ((ca * xf + sa * yf) * stripe_freq).sin();
            let speckle = 0.02 * rng.gen_range(-1.0f64..1.0);
            let v = (region + stripes + speckle).clamp(0.02, 0.98);
            data.push(T::of(v));
        }
    }
    Image::new(1, side, side, data).unwrap()
}

/// Writes `n` synthetic textures as 8-bit PNGs under `dir`.
pub fn write_texture_pngs(dir: &Path, n: usize, side: usize, seed: u64) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    (0..n)
        .map(|i| {
            let img = synth_texture::<f32>(side, seed + i as u64);
            let path = dir.join(format!("tex_{i:03}.png"));
            rdstn::png_io::save_image(&img, &path).unwrap();
            path
        })
        .collect()
}

/// Toy encoder sized for CPU training in seconds.
pub fn toy_encoder() -> EncoderConfig {
    EncoderConfig {
        channels: 1,
        dim: 48,
        stages: 1,
        blocks_per_stage: 2,
        window: 4,
        heads: 4,
        mlp_ratio: 2.0,
        use_lff: true,
        use_gff: true,
    }
}

pub fn toy_decoder() -> DecoderConfig {
    DecoderConfig { hidden: vec![128, 128], ..DecoderConfig::default() }
}

pub fn toy_train(steps: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        scale_min: 1.2,
        scale_max: 2.6,
        patch: 16,
        k_samples: 512,
        batch: 8,
        steps,
        lr: 1.5e-3,
        seed,
        eval_every: 0,
        eval_scales: vec![2.0],
        query_batch: 8192,
        loader_workers: 1,
        ..TrainConfig::default()
    }
}
