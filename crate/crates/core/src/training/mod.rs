//! Session likelihood, the Adam training loop and AUC evaluation.

mod loss;
mod metrics;
mod trainer;

pub use loss::{session_nll, LossBreakdown};
pub use metrics::compute_auc;
pub use trainer::{evaluate, score_dataset, train, EpochReport, MetricReport, ScoredPositions, TrainConfig, TrainOutcome};
