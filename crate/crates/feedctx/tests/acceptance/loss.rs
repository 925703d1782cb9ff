//! Criterion 2: the session loss is the sum of independently computed
//! per-position binary cross-entropies.

use feedctx_core::training::session_nll;
use feedctx_core::{rng, Labels, Model, ModelConfig, SessionInput};
use rand::Rng;

use crate::common::Outcome;

const SESSIONS: usize = 1000;
const TOL: f64 = 1e-10;

/// `−y·ln σ(z) − (1−y)·ln(1−σ(z))`, evaluated through the probability.
fn position_term(z: f64, y: bool) -> f64 {
    let p = 1.0 / (1.0 + (-z).exp());
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn run() -> Outcome {
    let mut r = rng::seeded(2024);
    let mut worst = 0.0f64;
    let mut worst_graph = 0.0f64;
    let models: Vec<Model> = (0..10)
        .map(|i| {
            let cfg = ModelConfig {
                embedding_dim: 4,
                experts: 3,
                expert_dim: 4,
                tower_hidden: vec![5],
                click_only: i % 5 == 4,
                ..ModelConfig::new(6, 30)
            };
            Model::new(cfg, i).unwrap()
        })
        .collect();
    for k in 0..SESSIONS {
        let model = &models[k % models.len()];
        let len = r.gen_range(1..=15);
        let hist = (0..r.gen_range(0..=10)).map(|_| r.gen_range(0..30)).collect();
        let items = (0..len).map(|_| r.gen_range(0..30)).collect();
        let labels: Vec<Labels> = (0..len)
            .map(|t| Labels { click: r.gen_bool(0.3), scroll: t + 1 < len || r.gen_bool(0.5) })
            .collect();
        let s = SessionInput::new(r.gen_range(0..6), hist, items).with_labels(labels.clone());
        let logits = model.session_logits(&s).unwrap();
        let click_only = model.config().click_only;
        let got = session_nll(&logits, &labels, click_only).unwrap().total;
        let want: f64 = logits
            .iter()
            .zip(&labels)
            .map(|(&(c, sc), l)| position_term(c, l.click) + if click_only { 0.0 } else { position_term(sc, l.scroll) })
            .sum();
        worst = worst.max((got - want).abs());

        // The training tape computes the same quantity.
        let mut p = model.pass();
        let out = p.forward_session(&s).unwrap();
        let c: Vec<f64> = labels.iter().map(|l| l.click as u8 as f64).collect();
        let sc: Vec<f64> = labels.iter().map(|l| l.scroll as u8 as f64).collect();
        let mut loss = p.scope.graph.bce_with_logits(out.click, &c).unwrap();
        if !click_only {
            let ls = p.scope.graph.bce_with_logits(out.scroll, &sc).unwrap();
            loss = p.scope.graph.add(loss, ls).unwrap();
        }
        worst_graph = worst_graph.max((p.scope.graph.scalar(loss) - want).abs());
    }
    Outcome::new(
        worst < TOL && worst_graph < TOL,
        format!("max |session_nll - oracle| {worst:.2e}, tape loss {worst_graph:.2e} over {SESSIONS} sessions (limit 1e-10)"),
    )
}
