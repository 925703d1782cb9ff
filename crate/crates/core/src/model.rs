//! The click/scroll network.
//!
//! Three parts feed one multi-gate mixture of experts at every position:
//!
//! 1. an interest net: cosine attention of the candidate item over the
//!    user's long-term history, followed by a factorization machine over
//!    (user, attended history, item);
//! 2. a context encoder: a GRU seeded with the user embedding and stepped
//!    with each exposed item concatenated with its position embedding,
//!    read out through self-attention over its past states;
//! 3. the mixture, with a click tower and a scroll tower.
//!
//! Scoring at position `t` always uses the context *before* item `t` is
//! consumed, which is what lets serving score items that have not been shown.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::layers::{
    compare_gradients, self_attention, CosineAttention, Embedding, FactorizationMachine, GradCheckReport, GruCell, Linear,
    Mmoe, ParamStore, Scope,
};
use crate::numerics::{Graph, Tensor, Var};
use crate::rng;
use crate::{Error, Result};

/// Architecture and ablation switches.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub heads: usize,
    pub experts: usize,
    pub expert_dim: usize,
    pub tower_hidden: Vec<usize>,
    /// Number of mixture tasks. Task 0 is click and task 1 is scroll; any
    /// further tasks are carried but never supervised.
    pub tasks: usize,
    /// Rows of the position table; later positions share the last row.
    pub max_position: usize,
    /// Only the most recent `max_history` long-term items are attended.
    pub max_history: usize,
    pub n_users: usize,
    pub n_items: usize,
    pub use_gru: bool,
    pub use_self_attention: bool,
    pub use_position: bool,
    /// Pointwise baseline: the scroll logit is produced but never trained.
    pub click_only: bool,
}

impl ModelConfig {
    /// Full-size defaults for the given vocabularies.
    pub fn new(n_users: usize, n_items: usize) -> Self {
        Self {
            embedding_dim: 16,
            heads: 2,
            experts: 8,
            expert_dim: 64,
            tower_hidden: vec![128, 32],
            tasks: 2,
            max_position: 15,
            max_history: 50,
            n_users,
            n_items,
            use_gru: true,
            use_self_attention: true,
            use_position: true,
            click_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.embedding_dim == 0 || self.heads == 0 || !self.embedding_dim.is_multiple_of(self.heads) {
            return fail(format!(
                "embedding_dim {} must be a positive multiple of heads {}",
                self.embedding_dim, self.heads
            ));
        }
        if self.max_position == 0 {
            return fail("max_position must be at least 1".into());
        }
        if self.tasks < 2 {
            return fail(format!("tasks must be at least 2 (click and scroll), got {}", self.tasks));
        }
        if self.experts == 0 || self.expert_dim == 0 {
            return fail("experts and expert_dim must be positive".into());
        }
        if self.tower_hidden.contains(&0) {
            return fail("tower hidden widths must be positive".into());
        }
        if self.n_users == 0 || self.n_items == 0 {
            return fail("n_users and n_items must be positive".into());
        }
        Ok(())
    }

    /// Width of the mixture input:
    /// user, attended interest, fm score, context, item, position.
    pub fn feature_dim(&self) -> usize {
        5 * self.embedding_dim + 1
    }
}

/// Click and scroll outcome at one exposed position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Labels {
    pub click: bool,
    pub scroll: bool,
}

/// One session as the model sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionInput {
    pub user: usize,
    /// Long-term history, oldest first.
    pub history: Vec<usize>,
    /// Exposed items in position order.
    pub items: Vec<usize>,
    pub labels: Option<Vec<Labels>>,
}

impl SessionInput {
    pub fn new(user: usize, history: Vec<usize>, items: Vec<usize>) -> Self {
        Self { user, history, items, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<Labels>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Non-empty, labels aligned with items, and `scroll = 0` only at the end.
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::EmptySequence("session items"));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.items.len() {
                return Err(Error::LengthMismatch {
                    what: "session labels vs items",
                    left: labels.len(),
                    right: self.items.len(),
                });
            }
            if let Some(t) = labels[..labels.len() - 1].iter().position(|l| !l.scroll) {
                return Err(Error::Contract(format!("scroll = 0 at position {t} before the end of the session")));
            }
        }
        Ok(())
    }
}

/// The intra-session context on a tape.
///
/// `h` is the recurrent state; `history` holds the post-exposure states
/// (the seed state is not one of them) and has length `position`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextState {
    pub h: Var,
    pub history: Vec<Var>,
    pub position: usize,
}

#[derive(Debug, Clone)]
struct Network {
    user: Embedding,
    item: Embedding,
    position: Option<Embedding>,
    interest: CosineAttention,
    fm: FactorizationMachine,
    input_proj: Linear,
    gru: Option<GruCell>,
    self_attn: Option<CosineAttention>,
    mmoe: Mmoe,
}

impl Network {
    fn build(config: &ModelConfig, store: &mut ParamStore, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::seeded(seed);
        let d = config.embedding_dim;
        let user = Embedding::new(store, "user_emb", config.n_users, d, false, &mut r);
        let item = Embedding::new(store, "item_emb", config.n_items, d, false, &mut r);
        let position = config
            .use_position
            .then(|| Embedding::new(store, "pos_emb", config.max_position, d, true, &mut r));
        let interest = CosineAttention::new(store, "interest.attn", d, config.heads, &mut r)?;
        let fm = FactorizationMachine::new(store, "interest.fm", 3);
        let input_proj = Linear::new(store, "context.input", 2 * d, d, true, &mut r);
        let gru = config.use_gru.then(|| GruCell::new(store, "context.gru", d, &mut r));
        let self_attn = if config.use_self_attention {
            Some(CosineAttention::new(store, "context.attn", d, config.heads, &mut r)?)
        } else {
            None
        };
        let mmoe = Mmoe::new(
            store,
            "mmoe",
            config.feature_dim(),
            config.experts,
            config.expert_dim,
            config.tasks,
            &config.tower_hidden,
            &mut r,
        )?;
        Ok(Self {
            user,
            item,
            position,
            interest,
            fm,
            input_proj,
            gru,
            self_attn,
            mmoe,
        })
    }
}

/// Configuration plus trained parameters.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    params: ParamStore,
    net: Network,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params == other.params
    }
}

impl Model {
    /// Freshly initialized parameters drawn from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut params = ParamStore::new();
        let net = Network::build(&config, &mut params, seed)?;
        Ok(Self { config, params, net })
    }

    /// Rebuild from named tensors. The names must be exactly the ones the
    /// config defines, with matching shapes.
    pub fn from_named<I>(config: ModelConfig, tensors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Tensor)>,
    {
        let mut model = Self::new(config, 0)?;
        let mut seen = vec![false; model.params.len()];
        for (name, t) in tensors {
            let id = model
                .params
                .id(&name)
                .ok_or_else(|| Error::Config(format!("unknown parameter `{name}` for this config")))?;
            if seen[id.0] {
                return Err(Error::Config(format!("duplicate parameter `{name}`")));
            }
            model.params.set(&name, t)?;
            seen[id.0] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!(
                "missing parameter `{}`",
                model.params.name(crate::layers::ParamId(i))
            )));
        }
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn pass(&self) -> Pass<'_> {
        Pass {
            model: self,
            scope: Scope::new(&self.params),
        }
    }

    /// Finite-difference check of the gradient of the scalar built by
    /// `loss` with respect to every parameter. See
    /// [`check_gradients`](crate::layers::check_gradients).
    pub fn check_gradients<F>(&mut self, step: f64, mut loss: F) -> Result<GradCheckReport>
    where
        F: for<'a> FnMut(&mut Pass<'a>) -> Result<Var>,
    {
        let (analytic, pattern) = {
            let mut pass = self.pass();
            let l = loss(&mut pass)?;
            let g = pass.scope.graph.backward(l)?;
            (pass.scope.param_grads(&g), pass.scope.graph.relu_pattern())
        };
        let mut eval = |m: &Model| -> Result<(f64, Vec<bool>)> {
            let mut pass = m.pass();
            let l = loss(&mut pass)?;
            Ok((pass.scope.graph.scalar(l), pass.scope.graph.relu_pattern()))
        };
        compare_gradients(self, |m| &mut m.params, &analytic, &pattern, step, &mut eval)
    }

    /// Raw `(click, scroll)` logits of every position of `session`.
    pub fn session_logits(&self, session: &SessionInput) -> Result<Vec<(f64, f64)>> {
        let mut pass = self.pass();
        let out = pass.forward_session(session)?;
        Ok(out.pairs(pass.graph()))
    }
}

/// Concatenated `[N × 1]` click and scroll logits.
#[derive(Debug, Clone, Copy)]
pub struct Logits {
    pub click: Var,
    pub scroll: Var,
}

impl Logits {
    pub fn pairs(&self, g: &Graph) -> Vec<(f64, f64)> {
        g.value(self.click)
            .data()
            .iter()
            .copied()
            .zip(g.value(self.scroll).data().iter().copied())
            .collect()
    }
}

/// One forward pass of a [`Model`] on its own tape.
#[derive(Debug)]
pub struct Pass<'m> {
    model: &'m Model,
    pub scope: Scope<'m>,
}

impl<'m> Pass<'m> {
    pub fn graph(&self) -> &Graph {
        &self.scope.graph
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    fn cfg(&self) -> &'m ModelConfig {
        &self.model.config
    }

    /// `[1 × d]`.
    pub fn user_embedding(&mut self, user: usize) -> Result<Var> {
        self.model.net.user.lookup(&mut self.scope, &[user])
    }

    /// `[n × d]`.
    pub fn item_embeddings(&mut self, items: &[usize]) -> Result<Var> {
        self.model.net.item.lookup(&mut self.scope, items)
    }

    /// `[n × d]`; zeros when positions are ablated.
    pub fn position_embeddings(&mut self, positions: &[usize]) -> Result<Var> {
        match &self.model.net.position {
            Some(table) => table.lookup(&mut self.scope, positions),
            None => self
                .scope
                .graph
                .constant(Tensor::zeros(positions.len(), self.cfg().embedding_dim)),
        }
    }

    pub fn init_context(&mut self, user_embedding: Var) -> Result<ContextState> {
        let d = self.scope.graph.dims(user_embedding);
        if d != (1, self.cfg().embedding_dim) {
            return Err(Error::InvalidShape(format!(
                "user embedding [{}x{}] vs embedding dim {}",
                d.0,
                d.1,
                self.cfg().embedding_dim
            )));
        }
        Ok(ContextState {
            h: user_embedding,
            history: Vec::new(),
            position: 0,
        })
    }

    /// Consume one exposed item.
    pub fn encode_step(&mut self, state: &ContextState, item_embedding: Var) -> Result<ContextState> {
        let pos = self.position_embeddings(&[state.position])?;
        let input = self.scope.graph.concat_cols(&[item_embedding, pos])?;
        let x = self.model.net.input_proj.forward(&mut self.scope, input)?;
        let h = match &self.model.net.gru {
            Some(gru) => gru.forward(&mut self.scope, state.h, x)?,
            None => x,
        };
        let mut history = state.history.clone();
        history.push(h);
        Ok(ContextState {
            h,
            history,
            position: state.position + 1,
        })
    }

    /// `[1 × d]` summary of the session so far: the mean of the last state
    /// and the self-attention over all states, or the last state alone when
    /// self-attention is ablated.
    pub fn context_readout(&mut self, state: &ContextState) -> Result<Var> {
        if state.history.is_empty() {
            return Ok(state.h);
        }
        match &self.model.net.self_attn {
            Some(attn) => {
                let last = *state.history.last().expect("non-empty");
                let attended = self_attention(attn, &mut self.scope, &state.history)?;
                let sum = self.scope.graph.add(last, attended)?;
                self.scope.graph.scale(sum, 0.5)
            }
            None => Ok(*state.history.last().expect("non-empty")),
        }
    }

    /// Long-term interest for `candidates [N × d]`: returns the fm score
    /// `[N × 1]` and the attended history `[N × d]`.
    pub fn interest_readout(&mut self, history: &[usize], user_rows: Var, candidates: Var) -> Result<(Var, Var)> {
        let n = self.scope.graph.dims(candidates).0;
        let recent = &history[history.len().saturating_sub(self.cfg().max_history)..];
        let attended = if recent.is_empty() {
            self.scope.graph.constant(Tensor::zeros(n, self.cfg().embedding_dim))?
        } else {
            let keys = self.item_embeddings(recent)?;
            self.model.net.interest.forward(&mut self.scope, candidates, keys, keys)?
        };
        let fm = self
            .model
            .net
            .fm
            .forward(&mut self.scope, &[(1.0, user_rows), (1.0, attended), (1.0, candidates)])?;
        Ok((fm, attended))
    }

    fn repeat_row(&mut self, row: Var, n: usize) -> Result<Var> {
        if n == 1 {
            Ok(row)
        } else {
            self.scope.graph.gather_rows(row, &vec![0; n])
        }
    }

    /// Mixture input rows for `items` scored at `positions` with the given
    /// context readouts `[N × d]`.
    pub fn features(&mut self, user_embedding: Var, history: &[usize], readouts: Var, items: &[usize], positions: &[usize]) -> Result<Var> {
        let n = items.len();
        let user_rows = self.repeat_row(user_embedding, n)?;
        let item_rows = self.item_embeddings(items)?;
        let (fm, attended) = self.interest_readout(history, user_rows, item_rows)?;
        let pos_rows = self.position_embeddings(positions)?;
        self.scope
            .graph
            .concat_cols(&[user_rows, attended, fm, readouts, item_rows, pos_rows])
    }

    fn heads(&mut self, features: Var) -> Result<Logits> {
        let out = self.model.net.mmoe.forward(&mut self.scope, features)?;
        Ok(Logits {
            click: out[0],
            scroll: out[1],
        })
    }

    /// Score every candidate against one shared context state.
    pub fn score_candidates(&mut self, state: &ContextState, user_embedding: Var, history: &[usize], items: &[usize]) -> Result<Logits> {
        if items.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let readout = self.context_readout(state)?;
        let readouts = self.repeat_row(readout, items.len())?;
        let positions = vec![state.position; items.len()];
        let f = self.features(user_embedding, history, readouts, items, &positions)?;
        self.heads(f)
    }

    /// Logits of item `t` of `session` given the state before it.
    pub fn score_position(&mut self, state: &ContextState, session: &SessionInput, t: usize) -> Result<Logits> {
        let item = *session.items.get(t).ok_or_else(|| {
            Error::Contract(format!("position {t} out of range for a session of {}", session.items.len()))
        })?;
        let readout = self.context_readout(state)?;
        let user = self.user_embedding(session.user)?;
        let f = self.features(user, &session.history, readout, &[item], &[t])?;
        self.heads(f)
    }

    /// Mixture input rows of a whole session, `[T × F]`.
    pub fn session_features(&mut self, session: &SessionInput) -> Result<Var> {
        if session.items.is_empty() {
            return Err(Error::EmptySequence("session items"));
        }
        let user = self.user_embedding(session.user)?;
        let items = self.item_embeddings(&session.items)?;
        let mut state = self.init_context(user)?;
        let mut readouts = Vec::with_capacity(session.items.len());
        for t in 0..session.items.len() {
            readouts.push(self.context_readout(&state)?);
            if t + 1 < session.items.len() {
                let x = self.scope.graph.gather_rows(items, &[t])?;
                state = self.encode_step(&state, x)?;
            }
        }
        let readouts = if readouts.len() == 1 { readouts[0] } else { self.scope.graph.concat_rows(&readouts)? };
        let positions: Vec<usize> = (0..session.items.len()).collect();
        self.features(user, &session.history, readouts, &session.items, &positions)
    }

    /// `[T × 1]` click and scroll logits of one session.
    pub fn forward_session(&mut self, session: &SessionInput) -> Result<Logits> {
        let f = self.session_features(session)?;
        self.heads(f)
    }

    /// Logits of several sessions stacked in order, through one mixture call.
    pub fn forward_batch(&mut self, sessions: &[&SessionInput]) -> Result<Logits> {
        let feats = sessions.iter().map(|s| self.session_features(s)).collect::<Result<Vec<_>>>()?;
        let f = if feats.len() == 1 { feats[0] } else { self.scope.graph.concat_rows(&feats)? };
        self.heads(f)
    }
}
