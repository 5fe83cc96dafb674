//! Minimal reverse-mode autodiff over [`Tensor`].
//!
//! A [`Graph`] is a per-call tape: forward calls append nodes and compute
//! values eagerly, `backward` walks the tape once in reverse. The op set is
//! exactly what the encoder/decoder need; anything that moves elements
//! around (padding, cropping, cyclic shifts, window partitioning, head
//! splitting, neighbor gathers, relative-position-bias lookups) is the
//! single `reindex` op driven by a precomputed index map.

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::real::Real;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(u32);

impl NodeId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Broadcast pattern for [`Graph::bcast_add`]: which part of the flattened
/// batch dim of `a` the smaller `b` batch indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcastGroup {
    /// `a` batch is `(outer, b_batch)` flattened; `b` index = `i % b_batch`.
    Inner,
    /// `a` batch is `(b_batch, inner)` flattened; `b` index = `i / inner`.
    Outer,
}

enum Op<T> {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Scale(NodeId, T),
    AddBias(NodeId, NodeId),
    MatMul(NodeId, NodeId),
    Bmm { a: NodeId, b: NodeId, transpose_b: bool },
    Reindex { x: NodeId, index: Arc<Vec<u32>> },
    ConcatCols(Vec<NodeId>),
    LayerNorm { x: NodeId, gamma: NodeId, beta: NodeId, mean: Vec<T>, rstd: Vec<T> },
    Softmax(NodeId),
    Relu(NodeId),
    Gelu(NodeId),
    Abs(NodeId),
    MeanAll(NodeId),
    MulRows { x: NodeId, w: NodeId },
    BcastAdd { a: NodeId, b: NodeId, group: BcastGroup },
}

struct Node<T> {
    op: Op<T>,
    value: Tensor<T>,
    requires_grad: bool,
}

pub struct Graph<T> {
    nodes: Vec<Node<T>>,
}

/// Per-node gradients produced by [`Graph::backward`].
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.grads[id.idx()].as_ref()
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor<T>> {
        self.grads[id.idx()].take()
    }
}

impl<T: Real> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Graph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.idx()].value
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        self.nodes[id.idx()].value.shape()
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>, requires_grad: bool) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { op, value, requires_grad });
        id
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.idx()].requires_grad
    }

    /// Leaf with no gradient tracking (inputs, targets, masks, weights of a
    /// frozen model).
    pub fn constant(&mut self, value: Tensor<T>) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    /// Leaf that accumulates a gradient (trainable parameter).
    pub fn param(&mut self, value: Tensor<T>) -> NodeId {
        self.push(Op::Leaf, value, true)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).add(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::Add(a, b), value, rg)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).sub(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::Sub(a, b), value, rg)
    }

    pub fn scale(&mut self, a: NodeId, c: T) -> NodeId {
        let value = self.value(a).scale(c);
        let rg = self.needs(a);
        self.push(Op::Scale(a, c), value, rg)
    }

    /// `(n, m) + (m)` broadcast over rows.
    pub fn add_bias(&mut self, x: NodeId, bias: NodeId) -> NodeId {
        let xv = self.value(x);
        let bv = self.value(bias);
        let m = *xv.shape().last().expect("add_bias on empty shape");
        assert_eq!(bv.shape(), &[m], "bias must match last dim");
        let rows = xv.numel() / m;
        let mut data = Vec::with_capacity(xv.numel());
        for r in 0..rows {
            for j in 0..m {
                data.push(xv.data()[r * m + j] + bv.data()[j]);
            }
        }
        let value = Tensor::new(xv.shape(), data);
        let rg = self.needs(x) || self.needs(bias);
        self.push(Op::AddBias(x, bias), value, rg)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).matmul(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::MatMul(a, b), value, rg)
    }

    pub fn bmm(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).bmm(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::Bmm { a, b, transpose_b: false }, value, rg)
    }

    pub fn bmm_nt(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).bmm_nt(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::Bmm { a, b, transpose_b: true }, value, rg)
    }

    /// Gather: `out[i] = x[index[i]]`, reshaped to `out_shape`. The backward
    /// pass scatter-adds, so index maps may repeat source positions.
    pub fn reindex(&mut self, x: NodeId, out_shape: &[usize], index: Arc<Vec<u32>>) -> NodeId {
        let xv = self.value(x);
        assert_eq!(index.len(), out_shape.iter().product::<usize>());
        let data: Vec<T> = index.iter().map(|&i| xv.data()[i as usize]).collect();
        let value = Tensor::new(out_shape, data);
        let rg = self.needs(x);
        self.push(Op::Reindex { x, index }, value, rg)
    }

    /// Reshape without moving data.
    pub fn reshape(&mut self, x: NodeId, shape: &[usize]) -> NodeId {
        let value = self.value(x).clone().reshaped(shape);
        let rg = self.needs(x);
        // Identity reindex is wasteful; model it as Scale by 1 to keep the
        // backward trivial while preserving the new shape.
        self.push(Op::Scale(x, T::one()), value, rg)
    }

    /// Concatenates rank-2 tensors with equal row counts along columns.
    pub fn concat_cols(&mut self, inputs: &[NodeId]) -> NodeId {
        assert!(!inputs.is_empty());
        let n = self.value(inputs[0]).shape()[0];
        let widths: Vec<usize> = inputs
            .iter()
            .map(|&id| {
                let s = self.value(id).shape();
                assert_eq!(s.len(), 2);
                assert_eq!(s[0], n, "concat_cols row mismatch");
                s[1]
            })
            .collect();
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(n * total);
        for r in 0..n {
            for (&id, &w) in inputs.iter().zip(&widths) {
                let src = self.value(id).data();
                data.extend_from_slice(&src[r * w..(r + 1) * w]);
            }
        }
        let value = Tensor::new(&[n, total], data);
        let rg = inputs.iter().any(|&id| self.needs(id));
        self.push(Op::ConcatCols(inputs.to_vec()), value, rg)
    }

    /// Layer normalization over the last axis with affine parameters.
    pub fn layer_norm(&mut self, x: NodeId, gamma: NodeId, beta: NodeId, eps: T) -> NodeId {
        let xv = self.value(x);
        let d = *xv.shape().last().expect("layer_norm on empty shape");
        assert_eq!(self.value(gamma).shape(), &[d]);
        assert_eq!(self.value(beta).shape(), &[d]);
        let rows = xv.numel() / d;
        let g = self.value(gamma).data().to_vec();
        let b = self.value(beta).data().to_vec();
        let mut mean = Vec::with_capacity(rows);
        let mut rstd = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(xv.numel());
        let inv_d = T::one() / T::of_usize(d);
        for r in 0..rows {
            let row = &xv.data()[r * d..(r + 1) * d];
            let mu = row.iter().copied().sum::<T>() * inv_d;
            let var = row.iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() * inv_d;
            let rs = T::one() / (var + eps).sqrt();
            mean.push(mu);
            rstd.push(rs);
            for (j, &v) in row.iter().enumerate() {
                data.push((v - mu) * rs * g[j] + b[j]);
            }
        }
        let value = Tensor::new(xv.shape(), data);
        let rg = self.needs(x) || self.needs(gamma) || self.needs(beta);
        self.push(Op::LayerNorm { x, gamma, beta, mean, rstd }, value, rg)
    }

    /// Softmax over the last axis, max-shifted for stability.
    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let d = *xv.shape().last().expect("softmax on empty shape");
        let rows = xv.numel() / d;
        let mut data = Vec::with_capacity(xv.numel());
        for r in 0..rows {
            let row = &xv.data()[r * d..(r + 1) * d];
            let mx = row.iter().copied().fold(T::neg_infinity(), T::max);
            let exps: Vec<T> = row.iter().map(|&v| (v - mx).exp()).collect();
            let sum: T = exps.iter().copied().sum();
            data.extend(exps.into_iter().map(|e| e / sum));
        }
        let value = Tensor::new(xv.shape(), data);
        let rg = self.needs(x);
        self.push(Op::Softmax(x), value, rg)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let value = self.value(x).map(|v| if v > T::zero() { v } else { T::zero() });
        let rg = self.needs(x);
        self.push(Op::Relu(x), value, rg)
    }

    pub fn gelu(&mut self, x: NodeId) -> NodeId {
        let value = self.value(x).map(gelu_fwd);
        let rg = self.needs(x);
        self.push(Op::Gelu(x), value, rg)
    }

    pub fn abs(&mut self, x: NodeId) -> NodeId {
        let value = self.value(x).map(T::abs);
        let rg = self.needs(x);
        self.push(Op::Abs(x), value, rg)
    }

    /// Mean over every element, producing a `[1]` scalar.
    pub fn mean_all(&mut self, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let mean = xv.iter().copied().sum::<T>() / T::of_usize(xv.numel());
        let rg = self.needs(x);
        self.push(Op::MeanAll(x), Tensor::scalar(mean), rg)
    }

    /// Scales each row of `x: (n, m)` by `w: (n)`.
    pub fn mul_rows(&mut self, x: NodeId, w: NodeId) -> NodeId {
        let xv = self.value(x);
        let wv = self.value(w);
        assert_eq!(xv.shape().len(), 2);
        let (n, m) = (xv.shape()[0], xv.shape()[1]);
        assert_eq!(wv.shape(), &[n]);
        let mut data = Vec::with_capacity(n * m);
        for r in 0..n {
            let wr = wv.data()[r];
            for j in 0..m {
                data.push(xv.data()[r * m + j] * wr);
            }
        }
        let value = Tensor::new(&[n, m], data);
        let rg = self.needs(x) || self.needs(w);
        self.push(Op::MulRows { x, w }, value, rg)
    }

    /// `(ba, n, m) + (bb, n, m)` with `b` broadcast across batch groups.
    pub fn bcast_add(&mut self, a: NodeId, b: NodeId, group: BcastGroup) -> NodeId {
        let av = self.value(a);
        let bv = self.value(b);
        assert_eq!(av.shape().len(), 3);
        assert_eq!(bv.shape().len(), 3);
        assert_eq!(&av.shape()[1..], &bv.shape()[1..]);
        let (ba, bb) = (av.shape()[0], bv.shape()[0]);
        assert_eq!(ba % bb, 0, "batch {ba} not a multiple of broadcast batch {bb}");
        let plane = av.shape()[1] * av.shape()[2];
        let mut data = Vec::with_capacity(av.numel());
        for i in 0..ba {
            let bi = match group {
                BcastGroup::Inner => i % bb,
                BcastGroup::Outer => i / (ba / bb),
            };
            let arow = &av.data()[i * plane..(i + 1) * plane];
            let brow = &bv.data()[bi * plane..(bi + 1) * plane];
            data.extend(arow.iter().zip(brow).map(|(&x, &y)| x + y));
        }
        let value = Tensor::new(av.shape(), data);
        let rg = self.needs(a) || self.needs(b);
        self.push(Op::BcastAdd { a, b, group }, value, rg)
    }

    /// Reverse pass from a scalar loss node. Only paths that reach a
    /// gradient-requiring leaf are traversed.
    pub fn backward(&self, loss: NodeId) -> Gradients<T> {
        assert_eq!(self.value(loss).numel(), 1, "backward needs a scalar loss");
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[loss.idx()] = Some(Tensor::scalar(T::one()));

        for idx in (0..=loss.idx()).rev() {
            if !self.nodes[idx].requires_grad {
                grads[idx] = None;
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.accumulate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Gradients { grads }
    }

    fn accumulate(&self, idx: usize, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) {
        let mut addg = |id: NodeId, delta: Tensor<T>| {
            if !self.needs(id) {
                return;
            }
            match &mut grads[id.idx()] {
                Some(acc) => acc.add_assign(&delta),
                slot => *slot = Some(delta),
            }
        };
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                addg(*a, g.clone());
                addg(*b, g.clone());
            }
            Op::Sub(a, b) => {
                addg(*a, g.clone());
                addg(*b, g.scale(-T::one()));
            }
            Op::Scale(a, c) => {
                let mut delta = g.scale(*c);
                if self.value(*a).shape() != delta.shape() {
                    delta = delta.reshaped(self.value(*a).shape());
                }
                addg(*a, delta);
            }
            Op::AddBias(x, bias) => {
                addg(*x, g.clone());
                if self.needs(*bias) {
                    let m = self.value(*bias).numel();
                    let rows = g.numel() / m;
                    let mut db = vec![T::zero(); m];
                    for r in 0..rows {
                        for j in 0..m {
                            db[j] += g.data()[r * m + j];
                        }
                    }
                    addg(*bias, Tensor::new(&[m], db));
                }
            }
            Op::MatMul(a, b) => {
                if self.needs(*a) {
                    addg(*a, g.matmul(&self.value(*b).transposed()));
                }
                if self.needs(*b) {
                    addg(*b, self.value(*a).transposed().matmul(g));
                }
            }
            Op::Bmm { a, b, transpose_b } => {
                if *transpose_b {
                    // c = a x b^T
                    if self.needs(*a) {
                        addg(*a, g.bmm(self.value(*b)));
                    }
                    if self.needs(*b) {
                        addg(*b, g.transposed().bmm(self.value(*a)));
                    }
                } else {
                    if self.needs(*a) {
                        addg(*a, g.bmm_nt(self.value(*b)));
                    }
                    if self.needs(*b) {
                        addg(*b, self.value(*a).transposed().bmm(g));
                    }
                }
            }
            Op::Reindex { x, index } => {
                if self.needs(*x) {
                    let mut dx = Tensor::zeros(self.value(*x).shape());
                    for (out_pos, &src) in index.iter().enumerate() {
                        dx.data_mut()[src as usize] += g.data()[out_pos];
                    }
                    addg(*x, dx);
                }
            }
            Op::ConcatCols(inputs) => {
                let total = g.shape()[1];
                let n = g.shape()[0];
                let mut offset = 0;
                for &id in inputs {
                    let w = self.value(id).shape()[1];
                    if self.needs(id) {
                        let mut data = Vec::with_capacity(n * w);
                        for r in 0..n {
                            data.extend_from_slice(&g.data()[r * total + offset..r * total + offset + w]);
                        }
                        addg(id, Tensor::new(&[n, w], data));
                    }
                    offset += w;
                }
            }
            Op::LayerNorm { x, gamma, beta, mean, rstd } => {
                let xv = self.value(*x);
                let d = *xv.shape().last().unwrap();
                let rows = xv.numel() / d;
                let gv = self.value(*gamma).data();
                let inv_d = T::one() / T::of_usize(d);
                let mut dx = Tensor::zeros(xv.shape());
                let mut dgamma = vec![T::zero(); d];
                let mut dbeta = vec![T::zero(); d];
                for r in 0..rows {
                    let row = &xv.data()[r * d..(r + 1) * d];
                    let grow = &g.data()[r * d..(r + 1) * d];
                    let (mu, rs) = (mean[r], rstd[r]);
                    let mut mean_h = T::zero();
                    let mut mean_hx = T::zero();
                    for j in 0..d {
                        let xhat = (row[j] - mu) * rs;
                        let h = grow[j] * gv[j];
                        mean_h += h;
                        mean_hx += h * xhat;
                        dgamma[j] += grow[j] * xhat;
                        dbeta[j] += grow[j];
                    }
                    mean_h *= inv_d;
                    mean_hx *= inv_d;
                    if self.needs(*x) {
                        let drow = &mut dx.data_mut()[r * d..(r + 1) * d];
                        for j in 0..d {
                            let xhat = (row[j] - mu) * rs;
                            let h = grow[j] * gv[j];
                            drow[j] = rs * (h - mean_h - xhat * mean_hx);
                        }
                    }
                }
                if self.needs(*x) {
                    addg(*x, dx);
                }
                addg(*gamma, Tensor::new(&[d], dgamma));
                addg(*beta, Tensor::new(&[d], dbeta));
            }
            Op::Softmax(x) => {
                if self.needs(*x) {
                    let y = &self.nodes[idx].value;
                    let d = *y.shape().last().unwrap();
                    let rows = y.numel() / d;
                    let mut dx = Tensor::zeros(y.shape());
                    for r in 0..rows {
                        let yrow = &y.data()[r * d..(r + 1) * d];
                        let grow = &g.data()[r * d..(r + 1) * d];
                        let dot: T = yrow.iter().zip(grow).map(|(&yv, &gv)| yv * gv).sum();
                        let drow = &mut dx.data_mut()[r * d..(r + 1) * d];
                        for j in 0..d {
                            drow[j] = yrow[j] * (grow[j] - dot);
                        }
                    }
                    addg(*x, dx);
                }
            }
            Op::Relu(x) => {
                if self.needs(*x) {
                    let xv = self.value(*x);
                    let data = xv
                        .iter()
                        .zip(g.iter())
                        .map(|(&v, &gv)| if v > T::zero() { gv } else { T::zero() })
                        .collect();
                    addg(*x, Tensor::new(xv.shape(), data));
                }
            }
            Op::Gelu(x) => {
                if self.needs(*x) {
                    let xv = self.value(*x);
                    let data = xv.iter().zip(g.iter()).map(|(&v, &gv)| gelu_bwd(v) * gv).collect();
                    addg(*x, Tensor::new(xv.shape(), data));
                }
            }
            Op::Abs(x) => {
                if self.needs(*x) {
                    let xv = self.value(*x);
                    let data = xv
                        .iter()
                        .zip(g.iter())
                        .map(|(&v, &gv)| {
                            if v > T::zero() {
                                gv
                            } else if v < T::zero() {
                                -gv
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                    addg(*x, Tensor::new(xv.shape(), data));
                }
            }
            Op::MeanAll(x) => {
                if self.needs(*x) {
                    let xv = self.value(*x);
                    let c = g.data()[0] / T::of_usize(xv.numel());
                    addg(*x, Tensor::full(xv.shape(), c));
                }
            }
            Op::MulRows { x, w } => {
                let xv = self.value(*x);
                let wv = self.value(*w);
                let (n, m) = (xv.shape()[0], xv.shape()[1]);
                if self.needs(*x) {
                    let mut data = Vec::with_capacity(n * m);
                    for r in 0..n {
                        let wr = wv.data()[r];
                        for j in 0..m {
                            data.push(g.data()[r * m + j] * wr);
                        }
                    }
                    addg(*x, Tensor::new(&[n, m], data));
                }
                if self.needs(*w) {
                    let mut dw = vec![T::zero(); n];
                    for r in 0..n {
                        for j in 0..m {
                            dw[r] += g.data()[r * m + j] * xv.data()[r * m + j];
                        }
                    }
                    addg(*w, Tensor::new(&[n], dw));
                }
            }
            Op::BcastAdd { a, b, group } => {
                if self.needs(*a) {
                    addg(*a, g.clone());
                }
                if self.needs(*b) {
                    let bv = self.value(*b);
                    let (ba, bb) = (g.shape()[0], bv.shape()[0]);
                    let plane = g.shape()[1] * g.shape()[2];
                    let mut db = Tensor::zeros(bv.shape());
                    for i in 0..ba {
                        let bi = match group {
                            BcastGroup::Inner => i % bb,
                            BcastGroup::Outer => i / (ba / bb),
                        };
                        let dst = &mut db.data_mut()[bi * plane..(bi + 1) * plane];
                        let src = &g.data()[i * plane..(i + 1) * plane];
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                    addg(*b, db);
                }
            }
        }
    }
}

const GELU_COEF: f64 = 0.044_715;

fn gelu_fwd<T: Real>(x: T) -> T {
    // tanh approximation; smooth, so finite-difference checks stay clean
    let c = T::of(core::f64::consts::FRAC_2_PI.sqrt());
    let k = T::of(GELU_COEF);
    let u = c * (x + k * x * x * x);
    T::half() * x * (T::one() + u.tanh())
}

fn gelu_bwd<T: Real>(x: T) -> T {
    let c = T::of(core::f64::consts::FRAC_2_PI.sqrt());
    let k = T::of(GELU_COEF);
    let u = c * (x + k * x * x * x);
    let t = u.tanh();
    let sech2 = T::one() - t * t;
    let du = c * (T::one() + T::of(3.0) * k * x * x);
    T::half() * (T::one() + t) + T::half() * x * sech2 * du
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Central-difference check of one op composition against the tape.
    fn check_grad(build: impl Fn(&mut Graph<f64>, NodeId) -> NodeId, x0: Tensor<f64>) {
        let analytic = {
            let mut g = Graph::new();
            let x = g.param(x0.clone());
            let loss = build(&mut g, x);
            let mut grads = g.backward(loss);
            grads.take(x).expect("gradient missing")
        };
        let eps = 1e-6;
        for i in 0..x0.numel() {
            let mut lo = x0.clone();
            lo.data_mut()[i] -= eps;
            let mut hi = x0.clone();
            hi.data_mut()[i] += eps;
            let f = |t: Tensor<f64>| {
                let mut g = Graph::new();
                let x = g.param(t);
                let loss = build(&mut g, x);
                g.value(loss).data()[0]
            };
            let numeric = (f(hi) - f(lo)) / (2.0 * eps);
            let a = analytic.data()[i];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            assert!(
                ((a - numeric) / denom).abs() < 1e-6,
                "grad mismatch at {i}: analytic {a} numeric {numeric}"
            );
        }
    }

    fn ramp(shape: &[usize]) -> Tensor<f64> {
        let n: usize = shape.iter().product();
        Tensor::new(shape, (0..n).map(|i| (i as f64) * 0.13 - 0.4).collect())
    }

    #[test]
    fn grad_matmul_bias_relu() {
        let w = Tensor::new(&[3, 2], vec![0.3, -0.2, 0.5, 0.9, -0.7, 0.1]);
        let b = Tensor::new(&[2], vec![0.05, -0.02]);
        check_grad(
            move |g, x| {
                let w = g.constant(w.clone());
                let b = g.constant(b.clone());
                let y = g.matmul(x, w);
                let y = g.add_bias(y, b);
                let y = g.relu(y);
                g.mean_all(y)
            },
            ramp(&[4, 3]),
        );
    }

    #[test]
    fn grad_layer_norm_all_inputs() {
        let x0 = ramp(&[3, 5]);
        let gamma0 = Tensor::new(&[5], vec![1.1, 0.9, 1.3, 0.7, 1.0]);
        let beta0 = Tensor::new(&[5], vec![0.1, -0.2, 0.0, 0.3, -0.1]);
        // against x (smooth composition; |.| would add kink noise to the
        // finite differences)
        let (g2, b2) = (gamma0.clone(), beta0.clone());
        check_grad(
            move |g, x| {
                let gamma = g.constant(g2.clone());
                let beta = g.constant(b2.clone());
                let y = g.layer_norm(x, gamma, beta, 1e-5);
                let y = g.gelu(y);
                g.mean_all(y)
            },
            x0.clone(),
        );
        // against gamma
        let xc = x0.clone();
        let b3 = beta0.clone();
        check_grad(
            move |g, gamma| {
                let x = g.constant(xc.clone());
                let beta = g.constant(b3.clone());
                let y = g.layer_norm(x, gamma, beta, 1e-5);
                let y = g.gelu(y);
                g.mean_all(y)
            },
            gamma0,
        );
    }

    #[test]
    fn grad_softmax_bmm() {
        let k = ramp(&[2, 4, 3]);
        check_grad(
            move |g, x| {
                let k = g.constant(k.clone());
                let s = g.bmm_nt(x, k);
                let s = g.softmax(s);
                let y = g.bmm(s, k);
                let y = g.abs(y);
                g.mean_all(y)
            },
            ramp(&[2, 4, 3]),
        );
    }

    #[test]
    fn grad_reindex_scatter_adds_duplicates() {
        let index = Arc::new(vec![0u32, 1, 1, 2, 2, 2]);
        check_grad(
            move |g, x| {
                let y = g.reindex(x, &[6], index.clone());
                let y = g.abs(y);
                g.mean_all(y)
            },
            Tensor::new(&[3], vec![0.5, -0.8, 1.2]),
        );
    }

    #[test]
    fn grad_concat_mulrows_bcast() {
        let w = Tensor::new(&[4], vec![0.25, 0.5, 0.125, 0.125]);
        let bias = ramp(&[1, 2, 2]);
        check_grad(
            move |g, x| {
                let other = g.constant(Tensor::full(&[4, 2], 0.3));
                let cat = g.concat_cols(&[x, other]);
                let w = g.constant(w.clone());
                let y = g.mul_rows(cat, w);
                let y = g.reshape(y, &[2, 2, 4]);
                let y3 = g.reshape(y, &[4, 2, 2]);
                let b = g.constant(bias.clone());
                let y3 = g.bcast_add(y3, b, BcastGroup::Inner);
                let y3 = g.gelu(y3);
                g.mean_all(y3)
            },
            ramp(&[4, 2]),
        );
    }

    #[test]
    fn bcast_add_outer_and_inner_agree_with_manual() {
        let mut g: Graph<f64> = Graph::new();
        let a = g.constant(Tensor::new(&[4, 1, 2], (0..8).map(f64::from).collect()));
        let b = g.constant(Tensor::new(&[2, 1, 2], vec![10.0, 20.0, 30.0, 40.0]));
        let inner = g.bcast_add(a, b, BcastGroup::Inner);
        assert_eq!(
            g.value(inner).data(),
            &[10.0, 21.0, 32.0, 43.0, 14.0, 25.0, 36.0, 47.0]
        );
        let outer = g.bcast_add(a, b, BcastGroup::Outer);
        assert_eq!(
            g.value(outer).data(),
            &[10.0, 21.0, 12.0, 23.0, 34.0, 45.0, 36.0, 47.0]
        );
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut g: Graph<f64> = Graph::new();
        let x = g.constant(ramp(&[5, 7]));
        let y = g.softmax(x);
        let yv = g.value(y);
        for r in 0..5 {
            let s: f64 = yv.data()[r * 7..(r + 1) * 7].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_skip_constant_paths() {
        let mut g: Graph<f64> = Graph::new();
        let x = g.constant(ramp(&[2, 2]));
        let p = g.param(ramp(&[2, 2]));
        let y = g.add(x, p);
        let loss = g.mean_all(y);
        let grads = g.backward(loss);
        assert!(grads.get(x).is_none());
        assert!(grads.get(p).is_some());
        let dp: Vec<f64> = grads.get(p).unwrap().data().to_vec();
        assert!(dp.iter().all(|&v| (v - 0.25).abs() < 1e-12));
    }
}
