//! PSNR, the benchmark metric.

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{shape_mismatch, CoreResult};
use crate::image::Image;
use crate::real::Real;

/// Peak signal-to-noise ratio against peak 1.0. Zero MSE is a distinct,
/// explicitly flagged outcome rather than an infinite float smuggled
/// through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Db(f64),
    /// Zero MSE: the images are identical.
    Identical,
}

impl Psnr {
    pub fn as_db(self) -> f64 {
        match self {
            Psnr::Db(v) => v,
            Psnr::Identical => f64::INFINITY,
        }
    }

    pub fn is_identical(self) -> bool {
        matches!(self, Psnr::Identical)
    }
}

impl core::fmt::Display for Psnr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.2}"),
            Psnr::Identical => write!(f, "inf"),
        }
    }
}

/// Mean squared error in double precision regardless of the image scalar.
pub fn mse<T: Real>(pred: &Image<T>, gt: &Image<T>) -> CoreResult<f64> {
    if pred.channels() != gt.channels() || pred.height() != gt.height() || pred.width() != gt.width()
    {
        return Err(shape_mismatch!(
            &[gt.channels(), gt.height(), gt.width()],
            &[pred.channels(), pred.height(), pred.width()]
        ));
    }
    let sum: f64 = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&a, &b)| {
            let d = a.to_f64_lossy() - b.to_f64_lossy();
            d * d
        })
        .sum();
    Ok(sum / pred.data().len() as f64)
}

/// `-10 * log10(MSE)` with peak 1.0.
pub fn psnr<T: Real>(pred: &Image<T>, gt: &Image<T>) -> CoreResult<Psnr> {
    let mse = mse(pred, gt)?;
    if mse == 0.0 {
        Ok(Psnr::Identical)
    } else {
        Ok(Psnr::Db(-10.0 * mse.log10()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_images_are_flagged() {
        let img = Image::constant(1, 8, 8, 0.4f64);
        assert_eq!(psnr(&img, &img).unwrap(), Psnr::Identical);
        assert!(psnr(&img, &img).unwrap().as_db().is_infinite());
    }

    #[test]
    fn uniform_error_of_a_tenth_is_twenty_db() {
        let gt = Image::constant(1, 16, 16, 0.5f64);
        let pred = Image::constant(1, 16, 16, 0.6f64);
        let Psnr::Db(db) = psnr(&pred, &gt).unwrap() else { panic!("expected finite") };
        assert!((db - 20.0).abs() < 1e-12);
    }

    #[test]
    fn unit_mse_is_zero_db() {
        let gt = Image::constant(1, 4, 4, 0.0f64);
        let pred = Image::constant(1, 4, 4, 1.0f64);
        let Psnr::Db(db) = psnr(&pred, &gt).unwrap() else { panic!("expected finite") };
        assert!(db.abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_permutation_invariant_and_monotone() {
        let mut a = Image::zeros(1, 3, 3);
        let mut b = Image::zeros(1, 3, 3);
        for (i, (x, y)) in a.data_mut().iter_mut().zip(b.data_mut()).enumerate() {
            *x = (i as f64) / 10.0;
            *y = (i as f64) / 12.0;
        }
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());

        // identical permutation of both images preserves PSNR
        let perm = [8usize, 2, 5, 0, 7, 1, 4, 6, 3];
        let pa = Image::new(1, 3, 3, perm.iter().map(|&i| a.data()[i]).collect()).unwrap();
        let pb = Image::new(1, 3, 3, perm.iter().map(|&i| b.data()[i]).collect()).unwrap();
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&pa, &pb).unwrap());

        // strictly decreasing in MSE
        let close = Image::constant(1, 3, 3, 0.01f64);
        let far = Image::constant(1, 3, 3, 0.2f64);
        let zero = Image::zeros(1, 3, 3);
        assert!(psnr(&close, &zero).unwrap().as_db() > psnr(&far, &zero).unwrap().as_db());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Image::constant(1, 4, 4, 0.5f64);
        let b = Image::constant(1, 4, 5, 0.5f64);
        assert!(psnr(&a, &b).is_err());
    }
}
