//! Criterion 3: Monte-Carlo value against the exact enumerator.

use std::time::Instant;

use feedctx_core::simulator::GroundTruth;
use feedctx_core::{rng, GroundTruthConfig};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::common::Outcome;

const CONFIGS: u64 = 100;
const SAMPLES: usize = 100_000;

fn fair_pair() -> f64 {
    let gt = GroundTruth::new(GroundTruthConfig {
        dim: 2,
        n_users: 1,
        n_items: 2,
        click_scale: 0.0,
        click_bias: vec![0.0],
        scroll_scale: 0.0,
        scroll_bias: vec![0.0],
        drift: 0.0,
        ..Default::default()
    })
    .unwrap();
    gt.user(0).unwrap().expected_value_exact(&[0, 1]).unwrap()
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut worst_z = 0.0f64;
    let mut failures = 0;
    for c in 0..CONFIGS {
        let mut r = rng::seeded(c ^ 0x0b1);
        let n_items = r.gen_range(1..=6);
        let bias = |r: &mut feedctx_core::rng::SimRng| (0..r.gen_range(1..=4)).map(|_| r.gen_range(-2.0..2.0)).collect();
        let cfg = GroundTruthConfig {
            dim: r.gen_range(2..=4),
            n_users: 3,
            n_items,
            click_scale: r.gen_range(-4.0..4.0),
            click_bias: bias(&mut r),
            scroll_scale: r.gen_range(-4.0..4.0),
            scroll_bias: bias(&mut r),
            drift: r.gen_range(0.0..1.5),
            drift_on_click: r.gen_bool(0.5),
            seed: c,
            ..Default::default()
        };
        let gt = GroundTruth::new(cfg).unwrap();
        let mut ordering: Vec<usize> = (0..n_items).collect();
        ordering.shuffle(&mut r);
        let user = gt.user(r.gen_range(0..3)).unwrap();
        let rep = user.expected_value_mc(&ordering, SAMPLES, &mut rng::stream(77, c)).unwrap();
        let exact = rep.exact_v.unwrap();
        let z = (rep.mc_v - exact).abs() / rep.mc_stderr.max(1e-300);
        worst_z = worst_z.max(z);
        if z > 4.0 {
            failures += 1;
        }
    }
    let v = fair_pair();
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        failures == 0 && (v - 1.5).abs() < 1e-12 && secs < 180.0,
        format!(
            "{failures}/{CONFIGS} configs beyond 4 stderr (worst {worst_z:.2}), 2-item fair fixture V = {v}, {secs:.1}s (limit 180s)"
        ),
    )
}
