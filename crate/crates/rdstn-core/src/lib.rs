//! Core math for RDSTN-style arbitrary-scale image super-resolution.
//!
//! Everything in this crate is pure computation over heap-allocated buffers:
//! the residual dense shifted-window encoder, the implicit-representation
//! decoder with its local ensemble, bicubic resampling, the training-step
//! machinery (L1 loss, Adam, reverse-mode gradients) and the PSNR metric.
//! File formats, dataset handling and the CLI live in the companion `rdstn`
//! crate; this one is `no_std` (with `alloc`) so it stays free of IO.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
pub mod coords;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod graph;
pub mod image;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod pairs;
pub mod params;
pub mod real;
pub mod resample;
pub mod rng;
pub mod tensor;
pub mod train;

pub use config::{apply_ablation_setting, AblationSetting, DecoderConfig, EncoderConfig, TrainConfig};
pub use coords::{make_coord_grid, CoordGrid};
pub use error::CoreError;
pub use image::Image;
pub use model::RdstnModel;
pub use real::Real;
pub use tensor::Tensor;
