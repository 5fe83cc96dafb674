//! Bicubic (Catmull-Rom) resampling.
//!
//! This is both the LR-synthesis kernel for training pairs and the bicubic
//! baseline of the benchmark tables. Conventions: a = -0.5 cubic, half-pixel
//! centers (`src = (dst + 0.5) * in/out - 0.5`), kernel widened by the scale
//! factor when minifying (antialias), reflected borders, per-tap weight
//! normalization. Output intensities are clamped back to [0, 1].

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid_arg, CoreResult};
use crate::image::Image;
use crate::real::Real;

/// Catmull-Rom kernel (cubic with a = -0.5, support 2).
pub fn catmull_rom<T: Real>(x: T) -> T {
    let a = x.abs();
    let (c15, c25, c4, c2) = (
        T::of(1.5),
        T::of(2.5),
        T::of(4.0),
        T::of(2.0),
    );
    if a <= T::one() {
        (c15 * a - c25) * a * a + T::one()
    } else if a < T::two() {
        ((-T::half() * a + c25) * a - c4) * a + c2
    } else {
        T::zero()
    }
}

/// Mirrors an out-of-range index back into [0, n) about the array edges
/// (edge pixel included: -1 -> 0, n -> n-1).
pub fn reflect_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Tap positions and normalized weights for one output sample on one axis.
fn axis_taps<T: Real>(out_i: usize, in_n: usize, out_n: usize) -> (isize, Vec<T>) {
    let scale = in_n as f64 / out_n as f64;
    let fscale = scale.max(1.0);
    let center = (out_i as f64 + 0.5) * scale - 0.5;
    let support = 2.0 * fscale;
    let first = (center - support).ceil() as isize;
    let last = (center + support).floor() as isize;
    let mut weights = Vec::with_capacity((last - first + 1) as usize);
    let mut sum = T::zero();
    for i in first..=last {
        let w = catmull_rom(T::of((i as f64 - center) / fscale));
        sum += w;
        weights.push(w);
    }
    for w in &mut weights {
        *w /= sum;
    }
    (first, weights)
}

/// Bicubic resize to `out_h x out_w`. Downsampling antialiases; identity
/// sizes reproduce the input exactly.
pub fn resize_bicubic<T: Real>(img: &Image<T>, out_h: usize, out_w: usize) -> CoreResult<Image<T>> {
    if out_h == 0 || out_w == 0 {
        return Err(invalid_arg!("target size must be positive, got {out_h}x{out_w}"));
    }
    let (c, in_h, in_w) = (img.channels(), img.height(), img.width());

    // horizontal pass: (in_h, in_w) -> (in_h, out_w), then vertical
    let xtaps: Vec<(isize, Vec<T>)> = (0..out_w).map(|j| axis_taps(j, in_w, out_w)).collect();
    let ytaps: Vec<(isize, Vec<T>)> = (0..out_h).map(|i| axis_taps(i, in_h, out_h)).collect();

    let mut mid = vec![T::zero(); c * in_h * out_w];
    for ch in 0..c {
        let plane = img.channel(ch);
        for y in 0..in_h {
            let row = &plane[y * in_w..(y + 1) * in_w];
            for (j, (first, ws)) in xtaps.iter().enumerate() {
                let mut acc = T::zero();
                for (t, &w) in ws.iter().enumerate() {
                    acc += w * row[reflect_index(first + t as isize, in_w)];
                }
                mid[(ch * in_h + y) * out_w + j] = acc;
            }
        }
    }

    let mut data = vec![T::zero(); c * out_h * out_w];
    for ch in 0..c {
        for (i, (first, ws)) in ytaps.iter().enumerate() {
            for j in 0..out_w {
                let mut acc = T::zero();
                for (t, &w) in ws.iter().enumerate() {
                    let y = reflect_index(first + t as isize, in_h);
                    acc += w * mid[(ch * in_h + y) * out_w + j];
                }
                data[(ch * out_h + i) * out_w + j] = acc;
            }
        }
    }

    let mut out = Image::new(c, out_h, out_w, data)?;
    out.clamp_in_place();
    Ok(out)
}
