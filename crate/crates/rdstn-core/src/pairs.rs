//! LR/HR training-pair synthesis at continuous scales.

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use rand::Rng;

use crate::coords::make_coord_grid;
use crate::error::{CoreError, CoreResult};
use crate::image::Image;
use crate::real::Real;
use crate::resample::resize_bicubic;
use crate::tensor::Tensor;

/// One supervised sample: an LR patch, query coordinates in the HR crop's
/// frame, and the ground-truth intensities at those coordinates.
#[derive(Debug, Clone)]
pub struct TrainingPair<T> {
    pub lr_patch: Image<T>,
    /// `[y, x]` per query, normalized to the HR crop.
    pub query_coords: Vec<[T; 2]>,
    /// `(K, channels)` intensity targets.
    pub targets: Tensor<T>,
    /// HR-crop side divided by the LR patch side.
    pub scale: f64,
    /// HR crop side in pixels (`round(scale * patch)`).
    pub hr_side: usize,
}

/// Crops `round(scale * patch)` square from `hr`, bicubic-downsamples it to
/// `patch x patch`, and samples `k_samples` ground-truth coordinates without
/// replacement. Returns [`CoreError::ImageTooSmall`] when the source image
/// cannot host the crop so loaders can resample another image.
pub fn synthesize_training_pair<T: Real>(
    hr: &Image<T>,
    patch: usize,
    k_samples: usize,
    scale: f64,
    augment_flips: bool,
    rng: &mut impl Rng,
) -> CoreResult<TrainingPair<T>> {
    if patch == 0 || k_samples == 0 {
        return Err(crate::error::invalid_arg!("patch and k_samples must be positive"));
    }
    if scale < 1.0 {
        return Err(crate::error::invalid_arg!("scale must be >= 1, got {scale}"));
    }
    let hr_side = (scale * patch as f64).round() as usize;
    if hr.height() < hr_side || hr.width() < hr_side {
        return Err(CoreError::ImageTooSmall { h: hr.height(), w: hr.width(), need: hr_side });
    }

    let y0 = rng.gen_range(0..=hr.height() - hr_side);
    let x0 = rng.gen_range(0..=hr.width() - hr_side);
    let mut crop = hr.crop(y0, x0, hr_side, hr_side)?;
    if augment_flips {
        if rng.gen::<bool>() {
            crop = crop.flip_horizontal();
        }
        if rng.gen::<bool>() {
            crop = crop.flip_vertical();
        }
    }

    let lr_patch =
        if hr_side == patch { crop.clone() } else { resize_bicubic(&crop, patch, patch)? };

    let grid = make_coord_grid(hr_side, hr_side)?;
    let cells = sample_without_replacement(hr_side * hr_side, k_samples.min(hr_side * hr_side), rng);
    let channels = hr.channels();
    let mut query_coords = Vec::with_capacity(cells.len());
    let mut targets = Vec::with_capacity(cells.len() * channels);
    for &cell in &cells {
        let (r, c) = (cell / hr_side, cell % hr_side);
        query_coords.push(grid.point::<T>(r, c));
        for ch in 0..channels {
            targets.push(crop.get(ch, r, c));
        }
    }
    let k = cells.len();
    Ok(TrainingPair {
        lr_patch,
        query_coords,
        targets: Tensor::new(&[k, channels], targets),
        scale,
        hr_side,
    })
}

/// First `k` entries of a seeded partial Fisher-Yates shuffle of `0..n`.
fn sample_without_replacement(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use std::collections::HashSet;

    fn textured(h: usize, w: usize) -> Image<f64> {
        let mut img = Image::zeros(1, h, w);
        for y in 0..h {
            for x in 0..w {
                img.set(0, y, x, ((x * 13 + y * 7) % 19) as f64 / 19.0);
            }
        }
        img
    }

    #[test]
    fn scale_one_lr_equals_crop() {
        let hr = textured(64, 64);
        let mut rng = stream_rng(1, Stream::Pair, 0);
        let pair = synthesize_training_pair(&hr, 48, 16, 1.0, false, &mut rng).unwrap();
        assert_eq!(pair.hr_side, 48);
        assert_eq!(pair.lr_patch.height(), 48);
        // identity downsample: every target equals the LR pixel at the query cell
        for (q, t) in pair.query_coords.iter().zip(pair.targets.iter()) {
            let (r, c) = make_coord_grid(48, 48).unwrap().cell_of(*q);
            assert_eq!(pair.lr_patch.get(0, r, c), *t);
        }
    }

    #[test]
    fn crop_side_is_rounded_scale_times_patch() {
        let hr = textured(128, 128);
        let mut rng = stream_rng(2, Stream::Pair, 0);
        let p2 = synthesize_training_pair(&hr, 48, 8, 2.0, false, &mut rng).unwrap();
        assert_eq!(p2.hr_side, 96);
        assert_eq!(p2.lr_patch.height(), 48);
        let p23 = synthesize_training_pair(&hr, 48, 8, 2.3, false, &mut rng).unwrap();
        assert_eq!(p23.hr_side, 110); // round(110.4)
    }

    #[test]
    fn crop_side_follows_round_over_scale_grid() {
        let hr = textured(200, 200);
        let patch = 24;
        for i in 0..100 {
            let s = 1.0 + 3.0 * (i as f64) / 99.0;
            let mut rng = stream_rng(3, Stream::Pair, i as u64);
            let pair = synthesize_training_pair(&hr, patch, 4, s, false, &mut rng).unwrap();
            assert_eq!(pair.hr_side, (s * patch as f64).round() as usize);
            assert_eq!(pair.lr_patch.height(), patch);
            assert_eq!(pair.lr_patch.width(), patch);
        }
    }

    #[test]
    fn queries_are_unique_in_range_with_matching_targets() {
        let hr = textured(96, 96);
        let mut rng = stream_rng(4, Stream::Pair, 0);
        let pair = synthesize_training_pair(&hr, 24, 2304, 2.0, false, &mut rng).unwrap();
        assert_eq!(pair.query_coords.len(), 2304); // 48^2 cells, k clamped
        let mut seen = HashSet::new();
        for q in &pair.query_coords {
            assert!(q[0] >= -1.0 && q[0] <= 1.0 && q[1] >= -1.0 && q[1] <= 1.0);
            let cell = make_coord_grid(48, 48).unwrap().cell_of(*q);
            assert!(seen.insert(cell), "duplicate query cell {cell:?}");
        }
    }

    #[test]
    fn too_small_image_signals_skip() {
        let hr = textured(40, 40);
        let mut rng = stream_rng(5, Stream::Pair, 0);
        let err = synthesize_training_pair(&hr, 48, 8, 1.0, false, &mut rng).unwrap_err();
        assert!(matches!(err, CoreError::ImageTooSmall { need: 48, .. }));
    }

    #[test]
    fn same_stream_reproduces_the_pair() {
        let hr = textured(100, 100);
        let mut a = stream_rng(9, Stream::Pair, 7);
        let mut b = stream_rng(9, Stream::Pair, 7);
        let pa = synthesize_training_pair(&hr, 24, 64, 1.7, true, &mut a).unwrap();
        let pb = synthesize_training_pair(&hr, 24, 64, 1.7, true, &mut b).unwrap();
        assert_eq!(pa.lr_patch, pb.lr_patch);
        assert_eq!(pa.query_coords, pb.query_coords);
        assert_eq!(pa.targets, pb.targets);
    }
}
