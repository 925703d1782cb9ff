use alloc::format;

use super::{ParamId, ParamStore, Scope};
use crate::numerics::Var;
use crate::rng::SimRng;
use crate::Result;

/// Gated recurrent unit with equal input and hidden width.
///
/// ```text
/// z  = σ(x·W_z + h·U_z + b_z)
/// r  = σ(x·W_r + h·U_r + b_r)
/// h~ = tanh(x·W_h + (r ⊙ h)·U_h + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h~
/// ```
#[derive(Debug, Clone)]
pub struct GruCell {
    pub w_update: ParamId,
    pub u_update: ParamId,
    pub b_update: ParamId,
    pub w_reset: ParamId,
    pub u_reset: ParamId,
    pub b_reset: ParamId,
    pub w_cand: ParamId,
    pub u_cand: ParamId,
    pub b_cand: ParamId,
    pub dim: usize,
}

impl GruCell {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, rng: &mut SimRng) -> Self {
        let mut m = |s: &str| store.add_uniform(format!("{name}.{s}"), dim, dim, rng);
        let (w_update, u_update, w_reset, u_reset, w_cand, u_cand) = (m("wz"), m("uz"), m("wr"), m("ur"), m("wh"), m("uh"));
        Self {
            w_update,
            u_update,
            b_update: store.add_zeros(format!("{name}.bz"), 1, dim),
            w_reset,
            u_reset,
            b_reset: store.add_zeros(format!("{name}.br"), 1, dim),
            w_cand,
            u_cand,
            b_cand: store.add_zeros(format!("{name}.bh"), 1, dim),
            dim,
        }
    }

    fn affine(scope: &mut Scope, x: Var, w: ParamId, h: Var, u: ParamId, b: ParamId) -> Result<Var> {
        let (w, u, b) = (scope.param(w), scope.param(u), scope.param(b));
        let g = &mut scope.graph;
        let xw = g.matmul(x, w)?;
        let hu = g.matmul(h, u)?;
        let s = g.add(xw, hu)?;
        g.add_row_bias(s, b)
    }

    pub fn forward(&self, scope: &mut Scope, h: Var, x: Var) -> Result<Var> {
        let z = Self::affine(scope, x, self.w_update, h, self.u_update, self.b_update)?;
        let z = scope.graph.sigmoid(z)?;
        let r = Self::affine(scope, x, self.w_reset, h, self.u_reset, self.b_reset)?;
        let r = scope.graph.sigmoid(r)?;
        let rh = scope.graph.mul(r, h)?;
        let cand = Self::affine(scope, x, self.w_cand, rh, self.u_cand, self.b_cand)?;
        let g = &mut scope.graph;
        let cand = g.tanh(cand)?;
        // h + z ⊙ (h~ − h)
        let delta = g.sub(cand, h)?;
        let step = g.mul(z, delta)?;
        g.add(h, step)
    }
}
