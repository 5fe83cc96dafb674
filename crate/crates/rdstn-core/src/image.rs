use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid_arg, shape_mismatch, CoreResult};
use crate::real::Real;
use crate::rng::next_gaussian;

/// Pixel grid in (channel, row, col) layout with intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> CoreResult<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(invalid_arg!("image dims must be positive, got {channels}x{height}x{width}"));
        }
        if data.len() != channels * height * width {
            return Err(shape_mismatch!(&[channels, height, width], &[data.len()]));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::constant(channels, height, width, T::zero())
    }

    pub fn constant(channels: usize, height: usize, width: usize, v: T) -> Self {
        Self {
            channels,
            height,
            width,
            data: alloc::vec![v; channels * height * width],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, v: T) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn channel(&self, c: usize) -> &[T] {
        &self.data[c * self.height * self.width..(c + 1) * self.height * self.width]
    }

    /// All intensities within [0, 1].
    pub fn in_range(&self) -> bool {
        self.data.iter().all(|&v| v >= T::zero() && v <= T::one())
    }

    pub fn clamp_in_place(&mut self) {
        for v in &mut self.data {
            *v = v.max(T::zero()).min(T::one());
        }
    }

    /// Crops a `h x w` window with its top-left corner at (y0, x0).
    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> CoreResult<Self> {
        if y0 + h > self.height || x0 + w > self.width || h == 0 || w == 0 {
            return Err(invalid_arg!(
                "crop {h}x{w}@({y0},{x0}) exceeds image {}x{}",
                self.height,
                self.width
            ));
        }
        let mut data = Vec::with_capacity(self.channels * h * w);
        for c in 0..self.channels {
            for y in y0..y0 + h {
                let row = (c * self.height + y) * self.width;
                data.extend_from_slice(&self.data[row + x0..row + x0 + w]);
            }
        }
        Ok(Self { channels: self.channels, height: h, width: w, data })
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut out = self.clone();
        for c in 0..self.channels {
            for y in 0..self.height {
                for x in 0..self.width {
                    out.set(c, y, x, self.get(c, y, self.width - 1 - x));
                }
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> Self {
        let mut out = self.clone();
        for c in 0..self.channels {
            for y in 0..self.height {
                for x in 0..self.width {
                    out.set(c, y, x, self.get(c, self.height - 1 - y, x));
                }
            }
        }
        out
    }

    /// Converts the scalar type (used to lift f32 images into f64 oracles).
    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
        }
    }
}

/// Adds i.i.d. zero-mean Gaussian noise with std `sigma` per pixel and
/// clamps the result back to [0, 1].
pub fn add_gaussian_noise<T: Real>(
    img: &Image<T>,
    sigma: T,
    rng: &mut impl Rng,
) -> CoreResult<Image<T>> {
    if sigma < T::zero() {
        return Err(invalid_arg!("noise sigma must be >= 0"));
    }
    let mut out = img.clone();
    if sigma > T::zero() {
        for v in out.data_mut() {
            *v += sigma * next_gaussian::<T>(rng);
        }
        out.clamp_in_place();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn zero_sigma_is_identity() {
        let img = Image::constant(1, 4, 4, 0.3f64);
        let mut rng = stream_rng(0, Stream::Noise, 0);
        let out = add_gaussian_noise(&img, 0.0, &mut rng).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn noise_std_matches_sigma() {
        // constant 0.5 keeps clamping inactive at sigma = 0.05
        let img = Image::constant(1, 256, 256, 0.5f64);
        let mut rng = stream_rng(3, Stream::Noise, 0);
        let out = add_gaussian_noise(&img, 0.05, &mut rng).unwrap();
        let n = out.data().len() as f64;
        let mean: f64 = out.data().iter().map(|v| v - 0.5).sum::<f64>() / n;
        let var: f64 =
            out.data().iter().map(|v| (v - 0.5 - mean) * (v - 0.5 - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!((std - 0.05).abs() < 0.005, "sample std {std}");
    }

    #[test]
    fn huge_sigma_saturates_but_stays_in_range() {
        let img = Image::constant(1, 32, 32, 0.5f64);
        let mut rng = stream_rng(5, Stream::Noise, 0);
        let out = add_gaussian_noise(&img, 10.0, &mut rng).unwrap();
        assert!(out.in_range());
        // at sigma = 10 nearly every sample clamps to an endpoint
        let saturated = out.data().iter().filter(|&&v| v == 0.0 || v == 1.0).count();
        assert!(saturated as f64 > 0.9 * out.data().len() as f64);
    }

    #[test]
    fn negative_sigma_is_rejected() {
        let img = Image::constant(1, 2, 2, 0.5f64);
        let mut rng = stream_rng(0, Stream::Noise, 0);
        assert!(add_gaussian_noise(&img, -0.1, &mut rng).is_err());
    }

    #[test]
    fn crop_reads_the_right_window() {
        let mut img = Image::zeros(1, 4, 5);
        for y in 0..4 {
            for x in 0..5 {
                img.set(0, y, x, (y * 5 + x) as f64);
            }
        }
        let c = img.crop(1, 2, 2, 3).unwrap();
        assert_eq!(c.data(), &[7.0, 8.0, 9.0, 12.0, 13.0, 14.0]);
        assert!(img.crop(3, 0, 2, 2).is_err());
    }
}
