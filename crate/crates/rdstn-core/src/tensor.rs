use alloc::vec;
use alloc::vec::Vec;

use crate::real::Real;

/// Dense row-major tensor. Shapes are runtime values; rank is small (1..3)
/// everywhere in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: &[usize], data: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "tensor data length {} does not match shape {:?}",
            data.len(),
            shape
        );
        Self { shape: shape.to_vec(), data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), data: vec![T::zero(); shape.iter().product()] }
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        Self { shape: shape.to_vec(), data: vec![value; shape.iter().product()] }
    }

    pub fn scalar(value: T) -> Self {
        Self { shape: vec![1], data: vec![value] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Reinterprets the buffer under a new shape of equal element count.
    pub fn reshaped(mut self, shape: &[usize]) -> Self {
        assert_eq!(self.data.len(), shape.iter().product::<usize>());
        self.shape = shape.to_vec();
        self
    }

    pub fn at(&self, index: &[usize]) -> T {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut flat = 0;
        for (i, &ix) in index.iter().enumerate() {
            debug_assert!(ix < self.shape[i]);
            flat = flat * self.shape[i] + ix;
        }
        self.data[flat]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.shape, other.shape, "elementwise op on mismatched shapes");
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape, other.shape);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `(n, k) x (k, m) -> (n, m)`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.shape.len(), 2);
        assert_eq!(other.shape.len(), 2);
        let (n, k) = (self.shape[0], self.shape[1]);
        let (k2, m) = (other.shape[0], other.shape[1]);
        assert_eq!(k, k2, "matmul inner dims {k} vs {k2}");
        let mut out = vec![T::zero(); n * m];
        matmul_into(&self.data, &other.data, &mut out, n, k, m, false);
        Self { shape: vec![n, m], data: out }
    }

    /// Batched `(b, n, k) x (b, k, m) -> (b, n, m)`.
    pub fn bmm(&self, other: &Self) -> Self {
        let (b, n, k) = dims3(&self.shape);
        let (b2, k2, m) = dims3(&other.shape);
        assert_eq!(b, b2);
        assert_eq!(k, k2);
        let mut out = vec![T::zero(); b * n * m];
        for i in 0..b {
            matmul_into(
                &self.data[i * n * k..(i + 1) * n * k],
                &other.data[i * k * m..(i + 1) * k * m],
                &mut out[i * n * m..(i + 1) * n * m],
                n,
                k,
                m,
                false,
            );
        }
        Self { shape: vec![b, n, m], data: out }
    }

    /// Batched `(b, n, k) x (b, m, k)^T -> (b, n, m)`.
    pub fn bmm_nt(&self, other: &Self) -> Self {
        let (b, n, k) = dims3(&self.shape);
        let (b2, m, k2) = dims3(&other.shape);
        assert_eq!(b, b2);
        assert_eq!(k, k2);
        let mut out = vec![T::zero(); b * n * m];
        for i in 0..b {
            matmul_into(
                &self.data[i * n * k..(i + 1) * n * k],
                &other.data[i * m * k..(i + 1) * m * k],
                &mut out[i * n * m..(i + 1) * n * m],
                n,
                k,
                m,
                true,
            );
        }
        Self { shape: vec![b, n, m], data: out }
    }

    /// Transposes the last two axes of a 2-D or 3-D tensor.
    pub fn transposed(&self) -> Self {
        match self.shape.len() {
            2 => {
                let (n, m) = (self.shape[0], self.shape[1]);
                let mut data = vec![T::zero(); n * m];
                for i in 0..n {
                    for j in 0..m {
                        data[j * n + i] = self.data[i * m + j];
                    }
                }
                Self { shape: vec![m, n], data }
            }
            3 => {
                let (b, n, m) = dims3(&self.shape);
                let mut data = vec![T::zero(); b * n * m];
                for t in 0..b {
                    let src = &self.data[t * n * m..];
                    let dst = &mut data[t * n * m..(t + 1) * n * m];
                    for i in 0..n {
                        for j in 0..m {
                            dst[j * n + i] = src[i * m + j];
                        }
                    }
                }
                Self { shape: vec![b, m, n], data }
            }
            r => panic!("transpose needs rank 2 or 3, got {r}"),
        }
    }

    pub fn iter(&self) -> core::slice::Iter<'_, T> {
        self.data.iter()
    }
}

fn dims3(shape: &[usize]) -> (usize, usize, usize) {
    assert_eq!(shape.len(), 3, "expected rank-3 shape, got {shape:?}");
    (shape[0], shape[1], shape[2])
}

/// `out += a x b` with `a: (n,k)` row-major and `b: (k,m)` row-major, or
/// `b: (m,k)` when `b_transposed`. The ikj ordering keeps the inner loop
/// streaming over contiguous rows.
fn matmul_into<T: Real>(
    a: &[T],
    b: &[T],
    out: &mut [T],
    n: usize,
    k: usize,
    m: usize,
    b_transposed: bool,
) {
    if b_transposed {
        for i in 0..n {
            let arow = &a[i * k..(i + 1) * k];
            for j in 0..m {
                let brow = &b[j * k..(j + 1) * k];
                let mut acc = T::zero();
                for t in 0..k {
                    acc += arow[t] * brow[t];
                }
                out[i * m + j] += acc;
            }
        }
    } else {
        for i in 0..n {
            let arow = &a[i * k..(i + 1) * k];
            let orow = &mut out[i * m..(i + 1) * m];
            for (t, &av) in arow.iter().enumerate() {
                let brow = &b[t * m..(t + 1) * m];
                for j in 0..m {
                    orow[j] += av * brow[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_hand_computation() {
        let a = Tensor::new(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Tensor::new(&[3, 2], vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.shape(), &[2, 2]);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn bmm_nt_matches_explicit_transpose() {
        let a = Tensor::new(&[2, 2, 3], (0..12).map(|v| v as f64).collect());
        let b = Tensor::new(&[2, 4, 3], (0..24).map(|v| (v as f64) * 0.5).collect());
        let direct = a.bmm_nt(&b);
        let via_transpose = a.bmm(&b.transposed());
        assert_eq!(direct, via_transpose);
    }

    #[test]
    fn transpose_round_trips() {
        let a = Tensor::new(&[3, 4], (0..12).map(|v| v as f32).collect());
        assert_eq!(a.transposed().transposed(), a);
    }
}
