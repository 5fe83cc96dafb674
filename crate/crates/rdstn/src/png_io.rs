//! PNG decode/encode mapped to [0, 1] float images.
//!
//! 8- and 16-bit grayscale and 8-bit RGB are supported; intensities are
//! normalized by the sample type's max value. Outputs are written as 8-bit.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use rdstn_core::image::Image;
use rdstn_core::real::Real;

use crate::error::{AppError, AppResult};

pub fn load_image<T: Real>(path: &Path) -> AppResult<Image<T>> {
    let dynimg = image::open(path).map_err(|source| AppError::Decode { path: path.to_path_buf(), source })?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    match dynimg {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().into_iter().map(|v| T::of(v as f64 / 255.0)).collect();
            Ok(Image::new(1, h, w, data)?)
        }
        DynamicImage::ImageLuma16(buf) => {
            let data = buf.into_raw().into_iter().map(|v| T::of(v as f64 / 65535.0)).collect();
            Ok(Image::new(1, h, w, data)?)
        }
        DynamicImage::ImageRgb8(buf) => {
            let raw = buf.into_raw();
            // interleaved RGB -> planar (C, H, W)
            let mut data = vec![T::zero(); 3 * h * w];
            for (i, chunk) in raw.chunks_exact(3).enumerate() {
                for c in 0..3 {
                    data[c * h * w + i] = T::of(chunk[c] as f64 / 255.0);
                }
            }
            Ok(Image::new(3, h, w, data)?)
        }
        other => Err(AppError::UnsupportedImage {
            path: path.to_path_buf(),
            reason: format!("{:?} (supported: 8/16-bit gray, 8-bit RGB)", other.color()),
        }),
    }
}

/// Loads and converts to the channel count a model expects (RGB -> Rec.601
/// luma, gray -> replicated channels).
pub fn load_image_as<T: Real>(path: &Path, channels: usize) -> AppResult<Image<T>> {
    let img = load_image::<T>(path)?;
    convert_channels(&img, channels).map_err(|e| AppError::InvalidArgument(e.to_string()))
}

/// Channel conversion between 1 and 3 channels.
pub fn convert_channels<T: Real>(img: &Image<T>, channels: usize) -> rdstn_core::error::CoreResult<Image<T>> {
    if img.channels() == channels {
        return Ok(img.clone());
    }
    let (h, w) = (img.height(), img.width());
    match (img.channels(), channels) {
        (3, 1) => {
            let (wr, wg, wb) = (T::of(0.299), T::of(0.587), T::of(0.114));
            let mut data = Vec::with_capacity(h * w);
            for i in 0..h * w {
                data.push(
                    wr * img.channel(0)[i] + wg * img.channel(1)[i] + wb * img.channel(2)[i],
                );
            }
            Image::new(1, h, w, data)
        }
        (1, 3) => {
            let mut data = Vec::with_capacity(3 * h * w);
            for _ in 0..3 {
                data.extend_from_slice(img.channel(0));
            }
            Image::new(3, h, w, data)
        }
        (from, to) => Err(rdstn_core::CoreError::InvalidArgument(format!(
            "cannot convert {from}-channel image to {to} channels"
        ))),
    }
}

pub fn save_image<T: Real>(img: &Image<T>, path: &Path) -> AppResult<()> {
    let (h, w) = (img.height() as u32, img.width() as u32);
    let to8 = |v: T| (v.to_f64_lossy().clamp(0.0, 1.0) * 255.0).round() as u8;
    let result = match img.channels() {
        1 => {
            let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
                ImageBuffer::from_raw(w, h, img.channel(0).iter().map(|&v| to8(v)).collect())
                    .expect("sized buffer");
            buf.save(path)
        }
        3 => {
            let mut raw = Vec::with_capacity(3 * img.channel(0).len());
            for i in 0..img.channel(0).len() {
                for c in 0..3 {
                    raw.push(to8(img.channel(c)[i]));
                }
            }
            let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
                ImageBuffer::from_raw(w, h, raw).expect("sized buffer");
            buf.save(path)
        }
        c => {
            return Err(AppError::InvalidArgument(format!("cannot write {c}-channel image")));
        }
    };
    result.map_err(|source| AppError::Decode { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn eight_bit_gray_round_trips_through_the_codec() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.png");
        let mut img = Image::zeros(1, 5, 7);
        for (i, v) in img.data_mut().iter_mut().enumerate() {
            *v = (i % 256) as f64 / 255.0;
        }
        save_image(&img, &path).unwrap();
        let back: Image<f64> = load_image(&path).unwrap();
        assert_eq!((back.channels(), back.height(), back.width()), (1, 5, 7));
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1.0 / 255.0);
        }
    }

    #[test]
    fn sixteen_bit_gray_is_normalized_by_its_max() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g16.png");
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_fn(4, 3, |x, y| Luma([(x * 20000 + y * 1000) as u16]));
        buf.save(&path).unwrap();
        let img: Image<f64> = load_image(&path).unwrap();
        assert!(img.in_range());
        assert!((img.get(0, 0, 3) - 60000.0 / 65535.0).abs() < 1e-9);
    }

    #[test]
    fn rgb_loads_planar_and_converts_to_gray() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.png");
        let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
            ImageBuffer::from_fn(2, 2, |x, y| Rgb([(x * 100) as u8, (y * 100) as u8, 50]));
        buf.save(&path).unwrap();
        let img: Image<f64> = load_image(&path).unwrap();
        assert_eq!(img.channels(), 3);
        let gray = convert_channels(&img, 1).unwrap();
        assert_eq!(gray.channels(), 1);
        let expect = 0.299 * (100.0 / 255.0) + 0.587 * 0.0 + 0.114 * (50.0 / 255.0);
        assert!((gray.get(0, 0, 1) - expect).abs() < 1e-9);
    }

    #[test]
    fn missing_file_is_a_decode_error() {
        let err = load_image::<f32>(Path::new("/nonexistent/x.png")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
