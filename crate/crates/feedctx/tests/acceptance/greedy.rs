//! Criterion 10: greedy generation invariants over random models, users and
//! candidate sets.

use std::collections::BTreeSet;

use feedctx_core::generation::select_best;
use feedctx_core::{generate_slate, rng, CandidateSet, GenerationOptions, Model, ModelConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;

use crate::common::Outcome;

const CASES: u32 = 10_000;
const ITEMS: usize = 40;

fn models() -> Vec<Model> {
    (0..8)
        .map(|i| {
            let cfg = ModelConfig {
                embedding_dim: 4,
                experts: 2,
                expert_dim: 3,
                tower_hidden: vec![4],
                use_gru: i % 4 != 1,
                use_self_attention: i % 4 != 2,
                use_position: i % 4 != 3,
                ..ModelConfig::new(6, ITEMS)
            };
            let mut m = Model::new(cfg, i).unwrap();
            let mut r = rng::seeded(i + 100);
            for t in m.params_mut().tensors_mut() {
                for x in t.data_mut() {
                    *x = r.gen_range(-1.0..1.0);
                }
            }
            m
        })
        .collect()
}

pub fn run() -> Outcome {
    let models = models();
    let mut runner = TestRunner::new_with_rng(
        Config { cases: CASES, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let strategy = (
        0usize..8,
        0usize..6,
        prop::collection::vec(0usize..ITEMS, 0..6),
        prop::sample::subsequence((0..ITEMS).collect::<Vec<_>>(), 1..=25),
        any::<u64>(),
        -1e3f64..1e3,
    );
    let result = runner.run(&strategy, |(mi, user, history, mut items, shuffle, shift)| {
        let model = &models[mi];
        let mut r = rng::seeded(shuffle);
        rand::seq::SliceRandom::shuffle(&mut items[..], &mut r);
        let k = items.len();
        let cands = CandidateSet::new(items.clone()).unwrap();
        let opts = GenerationOptions::default();
        let slate = generate_slate(model, user, &history, &cands, &opts).unwrap();

        prop_assert_eq!(slate.items.len(), k.min(15));
        let distinct: BTreeSet<usize> = slate.items.iter().copied().collect();
        prop_assert_eq!(distinct.len(), slate.items.len());
        prop_assert!(slate.items.iter().all(|i| items.contains(i)));

        let j = 1 + (shuffle as usize) % slate.items.len();
        let prefix = generate_slate(model, user, &history, &cands, &GenerationOptions { max_slate: j, ..opts }).unwrap();
        prop_assert_eq!(&prefix.items[..], &slate.items[..j]);

        let again = generate_slate(model, user, &history, &cands, &opts).unwrap();
        prop_assert_eq!(&again, &slate);

        // The first pick is the argmax of the summed logits, before and
        // after a common shift.
        let mut pass = model.pass();
        let u = pass.user_embedding(user).unwrap();
        let state = pass.init_context(u).unwrap();
        let logits = pass.score_candidates(&state, u, &history, &items).unwrap().pairs(pass.graph());
        let scored: Vec<(usize, f64)> = items.iter().zip(&logits).map(|(&i, &(c, s))| (i, c + s)).collect();
        let shifted: Vec<(usize, f64)> = scored.iter().map(|&(i, s)| (i, s + shift)).collect();
        let a = select_best(&scored).unwrap();
        prop_assert_eq!(scored[a].0, slate.items[0]);
        prop_assert_eq!(scored[select_best(&shifted).unwrap()].0, slate.items[0]);
        Ok::<(), TestCaseError>(())
    });
    let ties = {
        let mut zero = models[0].clone();
        zero.params_mut().zero_all();
        let c = CandidateSet::new(vec![17, 3, 29, 8, 0]).unwrap();
        generate_slate(&zero, 1, &[2], &c, &GenerationOptions::default()).unwrap().items == vec![0, 3, 8, 17, 29]
    };
    match result {
        Ok(()) => Outcome::new(
            ties,
            format!("{CASES} random cases: budget, duplicate-freedom, prefix, determinism and shift invariance hold; all-tie model orders by id: {ties}"),
        ),
        Err(e) => Outcome::new(false, format!("property violated: {e}")),
    }
}
