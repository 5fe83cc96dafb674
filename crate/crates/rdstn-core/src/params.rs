//! Named parameter registry shared by the model, optimizer and checkpoints.

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid_arg, CoreResult};
use crate::graph::{Graph, NodeId};
use crate::real::Real;
use crate::rng::next_gaussian;
use crate::tensor::Tensor;

/// Index of one named tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

#[derive(Debug, Clone)]
pub struct ParamEntry<T> {
    pub name: String,
    pub tensor: Tensor<T>,
}

/// Flat, insertion-ordered collection of learnable tensors. The order is
/// deterministic and defines both the optimizer-state layout and the
/// checkpoint layout.
#[derive(Debug, Clone, Default)]
pub struct ParamStore<T> {
    entries: Vec<ParamEntry<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> ParamId {
        let name = name.into();
        debug_assert!(
            self.entries.iter().all(|e| e.name != name),
            "duplicate parameter name {name}"
        );
        self.entries.push(ParamEntry { name, tensor });
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.entries[id.0].tensor
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.entries[id.0].tensor
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn entries(&self) -> &[ParamEntry<T>] {
        &self.entries
    }

    pub fn tensor_at(&self, i: usize) -> &Tensor<T> {
        &self.entries[i].tensor
    }

    pub fn tensor_at_mut(&mut self, i: usize) -> &mut Tensor<T> {
        &mut self.entries[i].tensor
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|e| e.name == name).map(ParamId)
    }

    pub fn set_by_name(&mut self, name: &str, tensor: Tensor<T>) -> CoreResult<()> {
        let id = self.find(name).ok_or_else(|| invalid_arg!("no parameter named '{name}'"))?;
        if self.get(id).shape() != tensor.shape() {
            return Err(invalid_arg!(
                "parameter '{name}' has shape {:?}, got {:?}",
                self.get(id).shape(),
                tensor.shape()
            ));
        }
        self.entries[id.0].tensor = tensor;
        Ok(())
    }

    /// Total learnable scalar count.
    pub fn total_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.tensor.numel()).sum()
    }

    /// Registers every parameter as a graph leaf; `trainable` controls
    /// whether gradients flow into them.
    pub fn bind(&self, g: &mut Graph<T>, trainable: bool) -> Bound {
        let ids = self
            .entries
            .iter()
            .map(|e| if trainable { g.param(e.tensor.clone()) } else { g.constant(e.tensor.clone()) })
            .collect();
        Bound { ids }
    }
}

/// Graph leaves for one `bind` call, aligned with the store's entry order.
pub struct Bound {
    ids: Vec<NodeId>,
}

impl Bound {
    pub fn node(&self, id: ParamId) -> NodeId {
        self.ids[id.0]
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }
}

/// Weight initialization schemes.
#[derive(Debug, Clone, Copy)]
pub enum Init {
    Zeros,
    Ones,
    Constant(f64),
    /// Gaussian with the given std (transformer-style 0.02 default).
    Normal(f64),
    /// Kaiming-style `sqrt(2 / fan_in)` Gaussian for ReLU stacks.
    HeNormal,
}

pub fn init_tensor<T: Real>(shape: &[usize], init: Init, fan_in: usize, rng: &mut impl Rng) -> Tensor<T> {
    let n: usize = shape.iter().product();
    let data: Vec<T> = match init {
        Init::Zeros => alloc::vec![T::zero(); n],
        Init::Ones => alloc::vec![T::one(); n],
        Init::Constant(c) => alloc::vec![T::of(c); n],
        Init::Normal(std) => {
            let s = T::of(std);
            (0..n).map(|_| next_gaussian::<T>(rng) * s).collect()
        }
        Init::HeNormal => {
            let s = T::of((2.0 / fan_in.max(1) as f64).sqrt());
            (0..n).map(|_| next_gaussian::<T>(rng) * s).collect()
        }
    };
    Tensor::new(shape, data)
}

/// Affine layer handle: weight `(fan_in, fan_out)` plus optional bias.
#[derive(Debug, Clone, Copy)]
pub struct LinearIds {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
}

impl LinearIds {
    pub fn init<T: Real>(
        store: &mut ParamStore<T>,
        rng: &mut impl Rng,
        prefix: &str,
        fan_in: usize,
        fan_out: usize,
        init: Init,
    ) -> Self {
        let weight = store.add(
            alloc::format!("{prefix}.weight"),
            init_tensor(&[fan_in, fan_out], init, fan_in, rng),
        );
        let bias = Some(store.add(
            alloc::format!("{prefix}.bias"),
            init_tensor(&[fan_out], Init::Zeros, fan_in, rng),
        ));
        Self { weight, bias }
    }

    pub fn attach<T: Real>(&self, g: &mut Graph<T>, bound: &Bound, x: NodeId) -> NodeId {
        let y = g.matmul(x, bound.node(self.weight));
        match self.bias {
            Some(b) => g.add_bias(y, bound.node(b)),
            None => y,
        }
    }
}

/// Layer-norm handle (gamma/beta over the channel axis).
#[derive(Debug, Clone, Copy)]
pub struct LayerNormIds {
    pub gamma: ParamId,
    pub beta: ParamId,
}

pub const LAYER_NORM_EPS: f64 = 1e-5;

impl LayerNormIds {
    pub fn init<T: Real>(store: &mut ParamStore<T>, rng: &mut impl Rng, prefix: &str, dim: usize) -> Self {
        let gamma = store.add(alloc::format!("{prefix}.gamma"), init_tensor(&[dim], Init::Ones, dim, rng));
        let beta = store.add(alloc::format!("{prefix}.beta"), init_tensor(&[dim], Init::Zeros, dim, rng));
        Self { gamma, beta }
    }

    pub fn attach<T: Real>(&self, g: &mut Graph<T>, bound: &Bound, x: NodeId) -> NodeId {
        g.layer_norm(x, bound.node(self.gamma), bound.node(self.beta), T::of(LAYER_NORM_EPS))
    }
}
