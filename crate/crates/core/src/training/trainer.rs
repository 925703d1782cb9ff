use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{compute_auc, session_nll};
use crate::model::{Labels, Model, SessionInput};
use crate::numerics::{Adam, AdamConfig};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub epochs: usize,
    /// Sessions per Adam step; the loss is averaged over their positions.
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Stop after this many epochs without a held-out improvement.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            patience: Some(3),
        }
    }
}

/// Held-out evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub auc_ctr: Option<f64>,
    pub auc_scr: Option<f64>,
    /// Mean negative log-likelihood per position.
    pub mean_loss: f64,
    pub sessions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean training loss per position over the epoch.
    pub loss: f64,
    pub holdout: Option<MetricReport>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best held-out epoch, or of the last epoch when
    /// there is no held-out set.
    pub model: Model,
    pub epochs: Vec<EpochReport>,
    pub best_epoch: usize,
    pub steps: u64,
}

fn labels_of(s: &SessionInput) -> Result<&[Labels]> {
    s.labels
        .as_deref()
        .ok_or(Error::Contract(alloc::format!("session of user {} has no labels", s.user)))
}

/// Minimize the session negative log-likelihood with Adam.
///
/// Deterministic for a given model, data and config.
pub fn train(model: Model, train_set: &[SessionInput], holdout: &[SessionInput], config: &TrainConfig) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    for s in train_set.iter().chain(holdout) {
        s.validate()?;
        labels_of(s)?;
    }
    let click_only = model.config().click_only;
    let mut model = model;
    let mut adam = Adam::new(config.adam, model.params().tensors());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut shuffle_rng = rng::seeded(config.seed);
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Model)> = None;
    let mut since_best = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut positions = 0usize;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&SessionInput> = chunk.iter().map(|&i| &train_set[i]).collect();
            let mut clicks = Vec::new();
            let mut scrolls = Vec::new();
            for s in &batch {
                for l in labels_of(s)? {
                    clicks.push(l.click as u8 as f64);
                    scrolls.push(l.scroll as u8 as f64);
                }
            }
            let n = clicks.len();
            let grads = {
                let mut pass = model.pass();
                let logits = pass.forward_batch(&batch)?;
                let g = &mut pass.scope.graph;
                let mut loss = g.bce_with_logits(logits.click, &clicks)?;
                if !click_only {
                    let ls = g.bce_with_logits(logits.scroll, &scrolls)?;
                    loss = g.add(loss, ls)?;
                }
                let raw = g.scalar(loss);
                if !raw.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch, batch: b });
                }
                loss_sum += raw;
                positions += n;
                let mean = g.scale(loss, 1.0 / n as f64)?;
                let grads = g.backward(mean)?;
                pass.scope.param_grads(&grads)
            };
            adam.step(model.params_mut().tensors_mut(), &grads)?;
        }
        let holdout_report = if holdout.is_empty() {
            None
        } else {
            Some(evaluate(&model, holdout, config.seed)?)
        };
        let criterion = holdout_report
            .as_ref()
            .and_then(|r| if click_only { r.auc_ctr } else { r.auc_scr });
        epochs.push(EpochReport {
            epoch,
            loss: loss_sum / positions as f64,
            holdout: holdout_report,
        });
        if let Some(score) = criterion {
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, epoch, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    break;
                }
            }
        }
    }
    let steps = adam.step_count();
    let (model, best_epoch) = match best {
        Some((_, e, m)) => (m, e),
        None => (model, epochs.len().saturating_sub(1)),
    };
    Ok(TrainOutcome {
        model,
        epochs,
        best_epoch,
        steps,
    })
}

/// Per-position scores pooled over a dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoredPositions {
    pub logits: Vec<(f64, f64)>,
    pub labels: Vec<Labels>,
    pub loss: f64,
}

const EVAL_BATCH: usize = 64;

/// Logits of every labelled position in `dataset`.
pub fn score_dataset(model: &Model, dataset: &[SessionInput]) -> Result<ScoredPositions> {
    let mut out = ScoredPositions::default();
    let click_only = model.config().click_only;
    for chunk in dataset.chunks(EVAL_BATCH) {
        let batch: Vec<&SessionInput> = chunk.iter().collect();
        let mut pass = model.pass();
        let logits = pass.forward_batch(&batch)?.pairs(pass.graph());
        let mut offset = 0;
        for s in chunk {
            let labels = labels_of(s)?;
            let part = &logits[offset..offset + s.len()];
            out.loss += session_nll(part, labels, click_only)?.total;
            out.labels.extend_from_slice(labels);
            offset += s.len();
        }
        out.logits.extend(logits);
    }
    Ok(out)
}

/// Pooled click and scroll AUC on `dataset`.
///
/// A click-only model is scored for scroll with its click head, since its
/// scroll head is never trained.
pub fn evaluate(model: &Model, dataset: &[SessionInput], seed: u64) -> Result<MetricReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scored = score_dataset(model, dataset)?;
    let clicks: Vec<bool> = scored.labels.iter().map(|l| l.click).collect();
    let scrolls: Vec<bool> = scored.labels.iter().map(|l| l.scroll).collect();
    let click_scores: Vec<f64> = scored.logits.iter().map(|p| p.0).collect();
    let scroll_scores: Vec<f64> = if model.config().click_only {
        click_scores.clone()
    } else {
        scored.logits.iter().map(|p| p.1).collect()
    };
    Ok(MetricReport {
        auc_ctr: compute_auc(&click_scores, &clicks),
        auc_scr: compute_auc(&scroll_scores, &scrolls),
        mean_loss: scored.loss / scored.labels.len() as f64,
        sessions: dataset.len(),
        seed,
    })
}
