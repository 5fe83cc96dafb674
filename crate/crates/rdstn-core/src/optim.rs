//! Adam optimizer over a [`ParamStore`].

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::params::ParamStore;
use crate::real::Real;
use crate::tensor::Tensor;

/// First-order adaptive optimizer with bias correction. State vectors are
/// aligned with the store's entry order and serialize with checkpoints so
/// resumed runs continue bit-identically.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl<T: Real> Adam<T> {
    pub fn new(store: &ParamStore<T>) -> Self {
        let m = store.entries().iter().map(|e| Tensor::zeros(e.tensor.shape())).collect();
        let v = store.entries().iter().map(|e| Tensor::zeros(e.tensor.shape())).collect();
        Self { m, v, t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// Applies one update. `grads[i]` pairs with store entry `i`; `None`
    /// entries (parameters off the loss path) are left untouched.
    pub fn step(&mut self, store: &mut ParamStore<T>, grads: &[Option<Tensor<T>>], lr: T) {
        assert_eq!(grads.len(), store.len());
        self.t += 1;
        let b1 = T::of(self.beta1);
        let b2 = T::of(self.beta2);
        let eps = T::of(self.eps);
        let bc1 = T::one() - T::of(self.beta1.powi(self.t as i32));
        let bc2 = T::one() - T::of(self.beta2.powi(self.t as i32));
        for (i, grad) in grads.iter().enumerate() {
            let Some(grad) = grad else { continue };
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let p = store.tensor_at_mut(i);
            for j in 0..grad.numel() {
                let gj = grad.data()[j];
                let mj = b1 * m.data()[j] + (T::one() - b1) * gj;
                let vj = b2 * v.data()[j] + (T::one() - b2) * gj * gj;
                m.data_mut()[j] = mj;
                v.data_mut()[j] = vj;
                let mhat = mj / bc1;
                let vhat = vj / bc2;
                p.data_mut()[j] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }

    /// Serialized view of the state for checkpointing.
    pub fn state(&self) -> (u64, &[Tensor<T>], &[Tensor<T>]) {
        (self.t, &self.m, &self.v)
    }

    /// Restores a previously saved state (shapes must match the store).
    pub fn restore(&mut self, t: u64, m: Vec<Tensor<T>>, v: Vec<Tensor<T>>) {
        assert_eq!(m.len(), self.m.len());
        assert_eq!(v.len(), self.v.len());
        self.t = t;
        self.m = m;
        self.v = v;
    }
}
