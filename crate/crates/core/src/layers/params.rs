use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::numerics::{Gradients, Graph, Tensor, Var};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Index of a tensor in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

/// Named trainable tensors in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Matrices start uniform in `(-INIT_RANGE, INIT_RANGE)`, biases at zero.
pub const INIT_RANGE: f64 = 0.05;

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        let name = name.into();
        debug_assert!(!self.names.contains(&name), "duplicate parameter {name}");
        self.names.push(name);
        self.tensors.push(value);
        ParamId(self.tensors.len() - 1)
    }

    pub fn add_uniform(&mut self, name: impl Into<String>, rows: usize, cols: usize, rng: &mut SimRng) -> ParamId {
        let data = (0..rows * cols).map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE)).collect();
        self.add(name, Tensor::matrix(rows, cols, data).expect("positive dims"))
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add(name, Tensor::zeros(rows, cols))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.id(name).map(|id| &self.tensors[id.0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    /// Overwrite the tensor named `name`, keeping its shape.
    pub fn set(&mut self, name: &str, value: Tensor) -> Result<()> {
        let id = self.id(name).ok_or_else(|| Error::Config(format!("unknown parameter `{name}`")))?;
        if self.tensors[id.0].shape() != value.shape() {
            return Err(Error::InvalidShape(format!(
                "parameter `{name}` has shape {:?}, got {:?}",
                self.tensors[id.0].shape(),
                value.shape()
            )));
        }
        self.tensors[id.0] = value;
        Ok(())
    }

    /// Set every parameter to zero.
    pub fn zero_all(&mut self) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// A forward pass: a tape plus lazily bound parameters.
#[derive(Debug)]
pub struct Scope<'p> {
    pub graph: Graph,
    params: &'p ParamStore,
    bound: Vec<Option<Var>>,
}

impl<'p> Scope<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            graph: Graph::new(),
            params,
            bound: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    /// The tape node holding parameter `id`.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.bound[id.0] {
            return v;
        }
        let v = self.graph.param(self.params.get(id).clone()).expect("parameters are matrices");
        self.bound[id.0] = Some(v);
        v
    }

    /// Gradients for every parameter in store order; unbound or unreached
    /// parameters get zeros.
    pub fn param_grads(&self, grads: &Gradients) -> Vec<Tensor> {
        self.bound
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Some(v) => grads.get(*v),
                None => {
                    let t = self.params.get(ParamId(i));
                    Tensor::zeros(t.rows(), t.cols())
                }
            })
            .collect()
    }
}
