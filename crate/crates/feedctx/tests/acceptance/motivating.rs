//! Criterion 4: on the shipped four-item fixture the best ordering is not
//! the one sorted by click probability.

use crate::common::{fixture_truth, permutations, Outcome};

pub fn run() -> Outcome {
    let gt = fixture_truth("motivating.cfg");
    let user = gt.user(0).unwrap();
    let items: Vec<usize> = (0..gt.n_items()).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let orderings = permutations(&items);
    for o in &orderings {
        let v = user.expected_value_exact(o).unwrap();
        if v > best.0 {
            best = (v, o.clone());
        }
    }
    let mut by_click = items.clone();
    let p0 = |i: usize| gt.probabilities(&user.latent, i, 0).unwrap().0;
    by_click.sort_by(|&a, &b| p0(b).total_cmp(&p0(a)));
    let v_click = user.expected_value_exact(&by_click).unwrap();
    let gap = best.0 / v_click - 1.0;
    Outcome::new(
        orderings.len() == 24 && best.1 != by_click && gap >= 0.05,
        format!(
            "best {:?} V={:.4} vs click-sorted {:?} V={:.4}, gap {:+.1}% over {} orderings (need >= 5%)",
            best.1,
            best.0,
            by_click,
            v_click,
            gap * 100.0,
            orderings.len()
        ),
    )
}
