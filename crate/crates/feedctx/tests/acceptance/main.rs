//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any fails. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p feedctx --test acceptance -- 3 4`.

mod ablation;
mod cli;
mod common;
mod gradients;
mod greedy;
mod learning;
mod loss;
mod motivating;
mod objective;
mod policy;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::Outcome;
use feedctx_core::Model;

const NAMES: [&str; 10] = [
    "gradient correctness",
    "loss decomposition",
    "objective oracle",
    "motivating fixture",
    "learning at desk scale",
    "ablation direction",
    "greedy policy value",
    "position statistics",
    "determinism and persistence",
    "greedy invariances",
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| selected.is_empty() || selected.contains(&n);
    let mut world: Option<Model> = None;
    let mut failed = Vec::new();
    let total = Instant::now();
    for n in 1..=10 {
        if !wanted(n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| match n {
            1 => gradients::run(),
            2 => loss::run(),
            3 => objective::run(),
            4 => motivating::run(),
            5 => {
                let (o, m) = learning::run();
                world = m;
                o
            }
            6 => ablation::run(),
            7 => {
                let m = world.take().unwrap_or_else(policy::trained_world_model);
                policy::run(&m)
            }
            8 => cli::position_statistics(),
            9 => cli::determinism(),
            _ => greedy::run(),
        }));
        let outcome = result.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed.push(n);
        }
        println!(
            "criterion {n:>2} [{verdict}] {}: {} [{:.1}s]",
            NAMES[n - 1],
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        let _ = std::io::stdout().flush();
    }
    println!("acceptance: {} failed {:?} in {:.0}s", failed.len(), failed, total.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
