use alloc::format;
use alloc::vec::Vec;

use super::{ParamId, ParamStore, Scope};
use crate::numerics::Var;
use crate::rng::SimRng;
use crate::Result;

/// `x·W + b`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, bias: bool, rng: &mut SimRng) -> Self {
        let weight = store.add_uniform(format!("{name}.w"), in_dim, out_dim, rng);
        let bias = bias.then(|| store.add_zeros(format!("{name}.b"), 1, out_dim));
        Self { weight, bias, in_dim, out_dim }
    }

    pub fn forward(&self, scope: &mut Scope, x: Var) -> Result<Var> {
        let w = scope.param(self.weight);
        let y = scope.graph.matmul(x, w)?;
        match self.bias {
            Some(b) => {
                let b = scope.param(b);
                scope.graph.add_row_bias(y, b)
            }
            None => Ok(y),
        }
    }
}

/// Relu hidden layers followed by a linear scalar output.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

impl Mlp {
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, hidden: &[usize], out_dim: usize, rng: &mut SimRng) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = in_dim;
        for (i, &h) in hidden.iter().enumerate() {
            layers.push(Linear::new(store, &format!("{name}.l{i}"), prev, h, true, rng));
            prev = h;
        }
        layers.push(Linear::new(store, &format!("{name}.l{}", hidden.len()), prev, out_dim, true, rng));
        Self { layers }
    }

    pub fn forward(&self, scope: &mut Scope, x: Var) -> Result<Var> {
        let last = self.layers.len() - 1;
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(scope, h)?;
            if i < last {
                h = scope.graph.relu(h)?;
            }
        }
        Ok(h)
    }
}
