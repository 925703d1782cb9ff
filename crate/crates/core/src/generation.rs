//! Greedy slate generation.
//!
//! With `K` candidates left, every candidate is scored against the same
//! context state and the next item is the argmax of
//! `softmax_k(λ·logit_c + logit_s)`. Softmax is monotone, so the argmax is
//! taken on the summed logits directly; the softmax value of the pick is kept
//! for reporting. The chosen item is then consumed by the context encoder
//! exactly as a logged exposure would be.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::math;
use crate::model::{ContextState, Model, Pass, SessionInput};
use crate::numerics::Var;
use crate::{Error, Result};

/// Distinct candidate items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    items: Vec<usize>,
}

impl CandidateSet {
    pub fn new(items: Vec<usize>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let mut seen = BTreeSet::new();
        for &i in &items {
            if !seen.insert(i) {
                return Err(Error::DuplicateCandidate(i));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationOptions {
    pub max_slate: usize,
    /// Weight λ of the click logit in `λ·logit_c + logit_s`.
    pub click_weight: f64,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            max_slate: 15,
            click_weight: 1.0,
        }
    }
}

/// An ordered, duplicate-free selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Slate {
    pub items: Vec<usize>,
    /// Summed logit of each pick at selection time.
    pub scores: Vec<f64>,
    /// Softmax probability of each pick among the candidates left.
    pub probabilities: Vec<f64>,
}

/// Index of the best `(item, summed score)`; ties go to the lowest item id.
pub fn select_best(scored: &[(usize, f64)]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, &(item, s)) in scored.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bi, bs) = scored[b];
                if s > bs || (s == bs && item < bi) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or(Error::EmptyCandidates)
}

fn softmax_at(scores: &[f64], k: usize) -> f64 {
    let mx = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|&s| math::exp(s - mx)).sum();
    math::exp(scores[k] - mx) / z
}

/// The index into `candidates` to show next, with its summed score and
/// softmax probability.
pub fn greedy_next(
    pass: &mut Pass<'_>,
    state: &ContextState,
    user_embedding: Var,
    history: &[usize],
    candidates: &[usize],
    click_weight: f64,
) -> Result<(usize, f64, f64)> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let logits = pass.score_candidates(state, user_embedding, history, candidates)?;
    let summed: Vec<f64> = logits
        .pairs(pass.graph())
        .iter()
        .map(|&(c, s)| click_weight * c + s)
        .collect();
    let scored: Vec<(usize, f64)> = candidates.iter().copied().zip(summed.iter().copied()).collect();
    let k = select_best(&scored)?;
    Ok((k, summed[k], softmax_at(&summed, k)))
}

/// Greedy sequence generation for one user.
pub fn generate_slate(model: &Model, user: usize, history: &[usize], candidates: &CandidateSet, options: &GenerationOptions) -> Result<Slate> {
    let mut pass = model.pass();
    let u = pass.user_embedding(user)?;
    let mut state = pass.init_context(u)?;
    let mut left: Vec<usize> = candidates.items().to_vec();
    let budget = options.max_slate.min(left.len());
    let mut slate = Slate {
        items: Vec::with_capacity(budget),
        scores: Vec::with_capacity(budget),
        probabilities: Vec::with_capacity(budget),
    };
    while slate.items.len() < budget {
        let (k, score, prob) = greedy_next(&mut pass, &state, u, history, &left, options.click_weight)?;
        let item = left.remove(k);
        slate.items.push(item);
        slate.scores.push(score);
        slate.probabilities.push(prob);
        if slate.items.len() < budget {
            let x = pass.item_embeddings(&[item])?;
            state = pass.encode_step(&state, x)?;
        }
    }
    Ok(slate)
}

/// `|top_k(a) ∩ top_k(b)| / k` for `k = 1..=max(len)`.
pub fn overlap_at_k(generated: &[usize], logged: &[usize]) -> Vec<f64> {
    let n = generated.len().max(logged.len());
    (1..=n)
        .map(|k| {
            let a: BTreeSet<usize> = generated.iter().take(k).copied().collect();
            let hits = logged.iter().take(k).filter(|i| a.contains(i)).count();
            hits as f64 / k as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub slate: Slate,
    /// Overlap of generated and logged orders at every cut-off `k`.
    pub overlap: Vec<f64>,
}

/// Rank `candidates` for the logged session's user and compare with the
/// logged exposure order.
pub fn replay_rank(model: &Model, logged: &SessionInput, candidates: &CandidateSet, options: &GenerationOptions) -> Result<ReplayReport> {
    let slate = generate_slate(model, logged.user, &logged.history, candidates, options)?;
    let overlap = overlap_at_k(&slate.items, &logged.items);
    Ok(ReplayReport { slate, overlap })
}
