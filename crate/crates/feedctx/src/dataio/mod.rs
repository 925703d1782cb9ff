//! Session logs, checkpoints and position statistics.

mod checkpoint;
mod sessions;
mod stats;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, StoredTensor, TrainingMeta, FORMAT_VERSION};
pub use sessions::{
    parse_sessions, read_sessions, render_sessions, write_sessions, Event, SessionRecord, MAX_USER_HISTORY,
};
pub use stats::{position_stats, write_stats_csv, PositionRow};

use feedctx_core::rng::mix64;

/// Whether session `index` falls in the 10% held-out part of a run seeded
/// with `seed`.
pub fn is_holdout(index: usize, seed: u64) -> bool {
    mix64(seed ^ mix64(index as u64)).is_multiple_of(10)
}

/// Split into (train, held-out) by [`is_holdout`].
pub fn split_holdout<T: Clone>(items: &[T], seed: u64) -> (Vec<T>, Vec<T>) {
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (i, x) in items.iter().enumerate() {
        if is_holdout(i, seed) {
            holdout.push(x.clone());
        } else {
            train.push(x.clone());
        }
    }
    (train, holdout)
}
