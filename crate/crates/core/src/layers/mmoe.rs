use alloc::format;
use alloc::vec::Vec;

use super::{Linear, Mlp, ParamId, ParamStore, Scope};
use crate::numerics::Var;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Multi-gate mixture of experts.
///
/// All experts share one `[in × experts·expert_dim]` matrix so a single
/// product evaluates them; expert `e` is column block `e`. Each task has a
/// bias-free softmax gate over experts and a relu tower ending in one raw
/// logit.
#[derive(Debug, Clone)]
pub struct Mmoe {
    pub experts: Linear,
    pub gates: Vec<ParamId>,
    pub towers: Vec<Mlp>,
    pub n_experts: usize,
    pub expert_dim: usize,
}

impl Mmoe {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        n_experts: usize,
        expert_dim: usize,
        tasks: usize,
        tower_hidden: &[usize],
        rng: &mut SimRng,
    ) -> Result<Self> {
        if n_experts == 0 || expert_dim == 0 || tasks == 0 {
            return Err(Error::Config("mmoe needs at least one expert, one task and a positive expert width".into()));
        }
        let experts = Linear::new(store, &format!("{name}.experts"), in_dim, n_experts * expert_dim, true, rng);
        let gates = (0..tasks)
            .map(|k| store.add_uniform(format!("{name}.gate{k}"), in_dim, n_experts, rng))
            .collect();
        let towers = (0..tasks)
            .map(|k| Mlp::new(store, &format!("{name}.tower{k}"), expert_dim, tower_hidden, 1, rng))
            .collect();
        Ok(Self {
            experts,
            gates,
            towers,
            n_experts,
            expert_dim,
        })
    }

    pub fn tasks(&self) -> usize {
        self.towers.len()
    }

    /// Gate distributions `[N × experts]` of task `k`.
    pub fn gate(&self, scope: &mut Scope, features: Var, k: usize) -> Result<Var> {
        let gk = scope.param(self.gates[k]);
        let logits = scope.graph.matmul(features, gk)?;
        scope.graph.softmax(logits)
    }

    /// One `[N × 1]` logit per task.
    pub fn forward(&self, scope: &mut Scope, features: Var) -> Result<Vec<Var>> {
        let pre = self.experts.forward(scope, features)?;
        let experts = scope.graph.relu(pre)?;
        let mut out = Vec::with_capacity(self.tasks());
        for k in 0..self.tasks() {
            let gate = self.gate(scope, features, k)?;
            let mix = scope.graph.mixture(experts, gate)?;
            out.push(self.towers[k].forward(scope, mix)?);
        }
        Ok(out)
    }
}
