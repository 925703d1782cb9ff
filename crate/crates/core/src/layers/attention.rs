use alloc::format;
use alloc::vec::Vec;

use super::{ParamId, ParamStore, Scope};
use crate::numerics::Var;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Multi-head attention scored by cosine similarity.
///
/// Each head `h` owns a column block of the query, key and value projections.
/// Weights are `softmax_i cos(q·P_Q[h], k_i·P_K[h])` at temperature 1, and a
/// zero-norm projection has cosine 0 with everything.
#[derive(Debug, Clone)]
pub struct CosineAttention {
    pub query: ParamId,
    pub key: ParamId,
    pub value: ParamId,
    pub dim: usize,
    pub heads: usize,
}

impl CosineAttention {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, heads: usize, rng: &mut SimRng) -> Result<Self> {
        if heads == 0 || !dim.is_multiple_of(heads) {
            return Err(Error::Config(format!("attention dim {dim} is not divisible by {heads} heads")));
        }
        Ok(Self {
            query: store.add_uniform(format!("{name}.q"), dim, dim, rng),
            key: store.add_uniform(format!("{name}.k"), dim, dim, rng),
            value: store.add_uniform(format!("{name}.v"), dim, dim, rng),
            dim,
            heads,
        })
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    /// Attend `queries [M×d]` over `keys`/`values` `[L×d]`; returns `[M×d]`.
    pub fn forward(&self, scope: &mut Scope, queries: Var, keys: Var, values: Var) -> Result<Var> {
        self.forward_with_weights(scope, queries, keys, values).map(|(out, _)| out)
    }

    /// Like [`forward`](Self::forward), also returning the `[M×L]` weight
    /// matrix of every head.
    pub fn forward_with_weights(&self, scope: &mut Scope, queries: Var, keys: Var, values: Var) -> Result<(Var, Vec<Var>)> {
        let (lk, dk) = scope.graph.dims(keys);
        let (lv, dv) = scope.graph.dims(values);
        if lk == 0 || lv == 0 {
            return Err(Error::EmptySequence("attention keys"));
        }
        if lk != lv || dk != self.dim || dv != self.dim || scope.graph.dims(queries).1 != self.dim {
            return Err(Error::InvalidShape(format!(
                "attention over keys [{lk}x{dk}] / values [{lv}x{dv}] with dim {}",
                self.dim
            )));
        }
        let (pq, pk, pv) = (scope.param(self.query), scope.param(self.key), scope.param(self.value));
        let g = &mut scope.graph;
        let q = g.matmul(queries, pq)?;
        let k = g.matmul(keys, pk)?;
        let v = g.matmul(values, pv)?;
        let hd = self.head_dim();
        let mut outs = Vec::with_capacity(self.heads);
        let mut weights = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let (qh, kh, vh) = if self.heads == 1 {
                (q, k, v)
            } else {
                (g.slice_cols(q, h * hd, hd)?, g.slice_cols(k, h * hd, hd)?, g.slice_cols(v, h * hd, hd)?)
            };
            let qn = g.normalize_rows(qh)?;
            let kn = g.normalize_rows(kh)?;
            let kt = g.transpose(kn)?;
            let cos = g.matmul(qn, kt)?;
            let w = g.softmax(cos)?;
            outs.push(g.matmul(w, vh)?);
            weights.push(w);
        }
        let out = if outs.len() == 1 { outs[0] } else { g.concat_cols(&outs)? };
        Ok((out, weights))
    }
}

/// The last state attends over every state (itself included).
pub fn self_attention(attn: &CosineAttention, scope: &mut Scope, states: &[Var]) -> Result<Var> {
    let last = *states.last().ok_or(Error::EmptySequence("self-attention states"))?;
    let stacked = if states.len() == 1 { last } else { scope.graph.concat_rows(states)? };
    attn.forward(scope, last, stacked, stacked)
}
