//! Criterion 6: ablations on the drift-heavy world.

use feedctx_core::{evaluate, train, Model, ModelConfig};

use crate::common::{desk_model, desk_training, fixture_truth, mean, Outcome};

const SEEDS: u64 = 5;

fn std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1).max(1) as f64).sqrt()
}

pub fn run() -> Outcome {
    let gt = fixture_truth("drift.cfg");
    let train_set = gt.generate_dataset(16_000, 201).unwrap();
    let valid = gt.generate_dataset(4_000, 202).unwrap();
    let test = gt.generate_dataset(10_000, 203).unwrap();
    let bayes = gt.bayes_auc(&test).unwrap().1.unwrap();
    let variants: [(&str, fn(&mut ModelConfig)); 5] = [
        ("full", |_| {}),
        ("w/o gru", |c| c.use_gru = false),
        ("w/o atten", |c| c.use_self_attention = false),
        ("w/o pos", |c| c.use_position = false),
        ("click-only", |c| c.click_only = true),
    ];
    let scores: Vec<Vec<f64>> = variants
        .iter()
        .map(|(_, tweak)| {
            (0..SEEDS)
                .map(|seed| {
                    let mut cfg = desk_model(gt.n_users(), gt.n_items());
                    tweak(&mut cfg);
                    let out = train(Model::new(cfg, seed).unwrap(), &train_set, &valid, &desk_training(seed, 10)).unwrap();
                    evaluate(&out.model, &test, seed).unwrap().auc_scr.unwrap()
                })
                .collect()
        })
        .collect();
    let means: Vec<f64> = scores.iter().map(|s| mean(s)).collect();
    let full = means[0];
    let ordered = means[1..4].iter().all(|&m| full >= m);
    let pass = ordered && means[4] <= 0.55 && full >= 0.75;
    let table: Vec<String> = variants
        .iter()
        .zip(&means)
        .zip(&scores)
        .map(|(((name, _), m), s)| format!("{name} {m:.4}±{:.4}", std(s)))
        .collect();
    Outcome::new(
        pass,
        format!(
            "AUC-scr over {SEEDS} seeds: {} (Bayes {bayes:.4}); full >= ablations: {ordered} (need full >= each, click-only <= 0.55, full >= 0.75)",
            table.join(", ")
        ),
    )
}
