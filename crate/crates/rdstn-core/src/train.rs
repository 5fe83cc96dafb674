//! Loss, scale sampling and the single optimizer step.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid_arg, shape_mismatch, CoreError, CoreResult};
use crate::model::RdstnModel;
use crate::optim::Adam;
use crate::pairs::TrainingPair;
use crate::real::Real;
use crate::tensor::Tensor;

/// Uniform draw from `[smin, smax)`.
pub fn sample_scale(rng: &mut impl Rng, smin: f64, smax: f64) -> CoreResult<f64> {
    if !(smin < smax) {
        return Err(invalid_arg!("scale bounds must satisfy smin < smax, got [{smin}, {smax})"));
    }
    Ok(rng.gen_range(smin..smax))
}

/// Mean absolute error.
pub fn l1_loss<T: Real>(pred: &Tensor<T>, target: &Tensor<T>) -> CoreResult<T> {
    if pred.shape() != target.shape() {
        return Err(shape_mismatch!(target.shape(), pred.shape()));
    }
    let n = T::of_usize(pred.numel());
    Ok(pred.iter().zip(target.iter()).map(|(&a, &b)| (a - b).abs()).sum::<T>() / n)
}

/// One optimizer step over a batch of pairs: encode each LR patch, decode
/// its query coordinates, average the per-pair L1 losses, update. Returns
/// the batch loss. A non-finite loss aborts with a divergence error instead
/// of silently continuing.
pub fn train_step<T: Real>(
    model: &mut RdstnModel<T>,
    pairs: &[TrainingPair<T>],
    opt: &mut Adam<T>,
    lr: T,
    step: usize,
) -> CoreResult<T> {
    if pairs.is_empty() {
        return Err(invalid_arg!("training batch is empty"));
    }
    let mut g = crate::graph::Graph::new();
    let bound = model.store().bind(&mut g, true);
    let mut total = None;
    for pair in pairs {
        let loss = model.attach_pair_loss(&mut g, &bound, pair)?;
        total = Some(match total {
            Some(acc) => g.add(acc, loss),
            None => loss,
        });
    }
    let total = total.expect("non-empty batch");
    let mean = g.scale(total, T::one() / T::of_usize(pairs.len()));
    let loss_value = g.value(mean).data()[0];
    if !loss_value.is_finite() {
        return Err(CoreError::NonFiniteLoss { step });
    }

    let grads = g.backward(mean);
    let mut grads_by_entry: Vec<Option<Tensor<T>>> = Vec::with_capacity(bound.ids().len());
    let mut grads = grads;
    for &id in bound.ids() {
        grads_by_entry.push(grads.take(id));
    }
    opt.step(model.store_mut(), &grads_by_entry, lr);
    Ok(loss_value)
}

/// Gradients of the batch loss per parameter entry, without an update.
/// Drives the finite-difference verification suite.
pub fn parameter_gradients<T: Real>(
    model: &RdstnModel<T>,
    pairs: &[TrainingPair<T>],
) -> CoreResult<(T, Vec<Option<Tensor<T>>>)> {
    if pairs.is_empty() {
        return Err(invalid_arg!("gradient batch is empty"));
    }
    let mut g = crate::graph::Graph::new();
    let bound = model.store().bind(&mut g, true);
    let mut total = None;
    for pair in pairs {
        let loss = model.attach_pair_loss(&mut g, &bound, pair)?;
        total = Some(match total {
            Some(acc) => g.add(acc, loss),
            None => loss,
        });
    }
    let mean = g.scale(total.expect("non-empty batch"), T::one() / T::of_usize(pairs.len()));
    let loss_value = g.value(mean).data()[0];
    let mut grads = g.backward(mean);
    let by_entry = bound.ids().iter().map(|&id| grads.take(id)).collect();
    Ok((loss_value, by_entry))
}

/// Batch loss alone (no tape bookkeeping beyond the forward pass); the
/// finite-difference oracle calls this many times.
pub fn batch_loss<T: Real>(model: &RdstnModel<T>, pairs: &[TrainingPair<T>]) -> CoreResult<T> {
    if pairs.is_empty() {
        return Err(invalid_arg!("loss batch is empty"));
    }
    let mut g = crate::graph::Graph::new();
    let bound = model.store().bind(&mut g, false);
    let mut sum = T::zero();
    for pair in pairs {
        let loss = model.attach_pair_loss(&mut g, &bound, pair)?;
        sum += g.value(loss).data()[0];
    }
    Ok(sum / T::of_usize(pairs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn scale_draws_cover_support_with_uniform_mean() {
        let mut rng = stream_rng(11, Stream::Scale, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let s = sample_scale(&mut rng, 1.0, 4.0).unwrap();
            assert!((1.0..4.0).contains(&s));
            sum += s;
        }
        let mean = sum / n as f64;
        assert!((mean - 2.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn scale_sequence_is_seed_deterministic() {
        let mut a = stream_rng(7, Stream::Scale, 0);
        let mut b = stream_rng(7, Stream::Scale, 0);
        for _ in 0..100 {
            assert_eq!(
                sample_scale(&mut a, 1.0, 4.0).unwrap(),
                sample_scale(&mut b, 1.0, 4.0).unwrap()
            );
        }
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let mut rng = stream_rng(0, Stream::Scale, 0);
        assert!(sample_scale(&mut rng, 4.0, 1.0).is_err());
        assert!(sample_scale(&mut rng, 2.0, 2.0).is_err());
    }

    #[test]
    fn l1_examples() {
        let a: Tensor<f64> = Tensor::new(&[2, 2], alloc::vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(l1_loss(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 0.1);
        assert!((l1_loss(&b, &a).unwrap() - 0.1).abs() < 1e-12);
        let c = Tensor::new(&[4], alloc::vec![0.0; 4]);
        assert!(l1_loss(&a, &c).is_err());
    }

    #[test]
    fn l1_gradient_is_sign_over_n() {
        // d/dpred mean|pred - target| = sign(pred - target) / n
        let pred = Tensor::new(&[3], alloc::vec![0.5, -0.25, 0.75]);
        let target = Tensor::new(&[3], alloc::vec![0.0, 0.0, 1.0]);
        let mut g = crate::graph::Graph::new();
        let p = g.param(pred);
        let t = g.constant(target);
        let d = g.sub(p, t);
        let a = g.abs(d);
        let loss = g.mean_all(a);
        let grads = g.backward(loss);
        let dp = grads.get(p).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(dp.data(), &[third, -third, -third]);
    }
}
