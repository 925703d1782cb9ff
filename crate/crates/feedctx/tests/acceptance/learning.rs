//! Criterion 5: held-out AUC close to the simulator's Bayes ceiling.

use std::time::Instant;

use feedctx_core::{evaluate, train, Model};

use crate::common::{desk_model, desk_training, fixture_truth, mean, Outcome};

const TRAIN_SESSIONS: usize = 50_000;
const SEEDS: u64 = 3;
const TOL: f64 = 0.03;

/// Returns the outcome and the first seed's model for later criteria.
pub fn run() -> (Outcome, Option<Model>) {
    let start = Instant::now();
    let gt = fixture_truth("world.cfg");
    let train_set = gt.generate_dataset(TRAIN_SESSIONS, 101).unwrap();
    let valid = gt.generate_dataset(5_000, 102).unwrap();
    let test = gt.generate_dataset(10_000, 103).unwrap();
    for s in train_set.iter().chain(&valid).chain(&test) {
        s.validate().unwrap();
    }
    let (bayes_ctr, bayes_scr) = gt.bayes_auc(&test).unwrap();
    let (bayes_ctr, bayes_scr) = (bayes_ctr.unwrap(), bayes_scr.unwrap());
    let mut ctr = Vec::new();
    let mut scr = Vec::new();
    let mut first = None;
    for seed in 0..SEEDS {
        let model = Model::new(desk_model(gt.n_users(), gt.n_items()), seed).unwrap();
        let out = train(model, &train_set, &valid, &desk_training(seed, 12)).unwrap();
        let m = evaluate(&out.model, &test, seed).unwrap();
        ctr.push(m.auc_ctr.unwrap());
        scr.push(m.auc_scr.unwrap());
        if first.is_none() {
            first = Some(out.model);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let (c, s) = (mean(&ctr), mean(&scr));
    let pass = (c - bayes_ctr).abs() <= TOL && (s - bayes_scr).abs() <= TOL && secs < 900.0;
    let detail = format!(
        "AUC-ctr {c:.4} vs Bayes {bayes_ctr:.4} (gap {:.4}), AUC-scr {s:.4} vs Bayes {bayes_scr:.4} (gap {:.4}), {SEEDS} seeds, {secs:.0}s (limits 0.03, 900s)",
        bayes_ctr - c,
        bayes_scr - s
    );
    (Outcome::new(pass, detail), first)
}
