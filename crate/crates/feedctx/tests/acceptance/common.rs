use std::path::PathBuf;

use feedctx::kv;
use feedctx_core::simulator::GroundTruth;
use feedctx_core::{AdamConfig, GroundTruthConfig, ModelConfig, TrainConfig};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_config(name: &str) -> GroundTruthConfig {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    kv::ground_truth_from_kv(&kv::parse_kv(&text).expect("fixture parses")).expect("fixture valid")
}

pub fn fixture_truth(name: &str) -> GroundTruth {
    GroundTruth::new(fixture_config(name)).expect("fixture builds")
}

/// The model size used for training at desk scale.
pub fn desk_model(n_users: usize, n_items: usize) -> ModelConfig {
    ModelConfig { expert_dim: 32, tower_hidden: vec![64, 16], ..ModelConfig::new(n_users, n_items) }
}

pub fn desk_training(seed: u64, epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 32,
        adam: AdamConfig { lr: 2e-3, ..AdamConfig::default() },
        seed,
        patience: Some(2),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// All orderings of `items`.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}
