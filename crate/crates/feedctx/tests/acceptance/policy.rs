//! Criterion 7: greedy slates from a trained model against exhaustive
//! search and random orderings under the exact oracle.

use feedctx_core::{generate_slate, rng, train, CandidateSet, GenerationOptions, Model};
use rand::seq::index::sample;

use crate::common::{desk_model, desk_training, fixture_truth, mean, permutations, Outcome};

const USERS: usize = 200;
const CANDIDATES: usize = 6;

pub fn trained_world_model() -> Model {
    let gt = fixture_truth("world.cfg");
    let train_set = gt.generate_dataset(50_000, 101).unwrap();
    let valid = gt.generate_dataset(5_000, 102).unwrap();
    let model = Model::new(desk_model(gt.n_users(), gt.n_items()), 0).unwrap();
    train(model, &train_set, &valid, &desk_training(0, 12)).unwrap().model
}

pub fn run(model: &Model) -> Outcome {
    let gt = fixture_truth("world.cfg");
    let mut greedy = Vec::new();
    let mut best = Vec::new();
    let mut random = Vec::new();
    let mut ratios = Vec::new();
    for u in 0..USERS {
        let mut r = rng::stream(707, u as u64);
        let items: Vec<usize> = sample(&mut r, gt.n_items(), CANDIDATES).into_vec();
        let history = gt.user_history(u).unwrap();
        let slate = generate_slate(model, u, &history, &CandidateSet::new(items.clone()).unwrap(), &GenerationOptions::default())
            .unwrap();
        let user = gt.user(u).unwrap();
        let vg = user.expected_value_exact(&slate.items).unwrap();
        let all: Vec<f64> = permutations(&items).iter().map(|o| user.expected_value_exact(o).unwrap()).collect();
        let vb = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        greedy.push(vg);
        best.push(vb);
        random.push(mean(&all));
        ratios.push(vg / vb);
    }
    let (g, b, r) = (mean(&greedy), mean(&best), mean(&random));
    Outcome::new(
        g >= 0.95 * b && g > r,
        format!(
            "mean V greedy {g:.4}, best {b:.4} ({:.1}% of best, per-user mean ratio {:.3}), random {r:.4}, {USERS} users x {CANDIDATES} candidates (need >= 95% and > random)",
            100.0 * g / b,
            mean(&ratios)
        ),
    )
}
