//! Criterion 1: every layer and the full session loss against central
//! differences over random configurations.

use std::time::Instant;

use feedctx_core::layers::{
    check_gradients, self_attention, CosineAttention, Embedding, FactorizationMachine, GradCheckReport, GruCell,
    Linear, Mlp, Mmoe, ParamStore, Scope,
};
use feedctx_core::numerics::{Tensor, Var};
use feedctx_core::{rng, Model, ModelConfig, Result, SessionInput};
use rand::Rng;

use crate::common::Outcome;

const STEP: f64 = 1e-4;
const TOL: f64 = 1e-4;
const CONFIGS: u64 = 120;

fn random(r: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn project(s: &mut Scope, v: Var, r: &mut impl Rng) -> Result<Var> {
    let (n, m) = s.graph.dims(v);
    let w = s.graph.constant(random(r, n, m))?;
    let p = s.graph.mul(v, w)?;
    s.graph.sum(p)
}

fn scramble(store: &mut ParamStore, r: &mut impl Rng) {
    for t in store.tensors_mut() {
        *t = random(r, t.rows(), t.cols());
    }
}

fn layer_reports(seed: u64) -> Vec<(&'static str, GradCheckReport)> {
    let mut r = rng::seeded(seed);
    let heads = r.gen_range(1..=2);
    let d = heads * r.gen_range(1..=3);
    let n = r.gen_range(1..=4);
    let proj_seed: u64 = r.gen();
    let mut out = Vec::new();
    let mut run = |name: &'static str, store: &mut ParamStore, f: &mut dyn FnMut(&mut Scope) -> Result<Var>| {
        let report = check_gradients(store, STEP, |s| f(s)).unwrap();
        out.push((name, report));
    };
    let x_rows = random(&mut r, n, d);

    let mut store = ParamStore::new();
    let lin = Linear::new(&mut store, "lin", d, r.gen_range(1..=5), r.gen_bool(0.5), &mut r);
    let x = store.add("x", x_rows.clone());
    scramble(&mut store, &mut r);
    run("linear", &mut store, &mut |s| {
        let xv = s.param(x);
        let y = lin.forward(s, xv)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let hidden: Vec<usize> = (0..r.gen_range(0..=2)).map(|_| r.gen_range(1..=5)).collect();
    let mlp = Mlp::new(&mut store, "mlp", d, &hidden, 1, &mut r);
    let x = store.add("x", x_rows.clone());
    scramble(&mut store, &mut r);
    run("mlp", &mut store, &mut |s| {
        let xv = s.param(x);
        let y = mlp.forward(s, xv)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let vocab = r.gen_range(1..=6);
    let clamp = r.gen_bool(0.5);
    let emb = Embedding::new(&mut store, "emb", vocab, d, clamp, &mut r);
    let ids: Vec<usize> = (0..n).map(|_| r.gen_range(0..if clamp { vocab + 2 } else { vocab })).collect();
    run("embedding", &mut store, &mut |s| {
        let y = emb.lookup(s, &ids)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let attn = CosineAttention::new(&mut store, "attn", d, heads, &mut r).unwrap();
    let nq = r.gen_range(1..=3);
    let q = store.add("q", random(&mut r, nq, d));
    let nk = r.gen_range(1..=4);
    let kv = store.add("kv", random(&mut r, nk, d));
    scramble(&mut store, &mut r);
    run("cosine_attention", &mut store, &mut |s| {
        let (qv, kvv) = (s.param(q), s.param(kv));
        let y = attn.forward(s, qv, kvv, kvv)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let attn = CosineAttention::new(&mut store, "sa", d, heads, &mut r).unwrap();
    let ns = r.gen_range(1..=4);
    let states = store.add("states", random(&mut r, ns, d));
    scramble(&mut store, &mut r);
    run("self_attention", &mut store, &mut |s| {
        let st = s.param(states);
        let rows: Vec<Var> = (0..s.graph.dims(st).0).map(|i| s.graph.gather_rows(st, &[i])).collect::<Result<_>>()?;
        let y = self_attention(&attn, s, &rows)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let fields = r.gen_range(1..=4);
    let fm = FactorizationMachine::new(&mut store, "fm", fields);
    let factors = store.add("factors", random(&mut r, fields * n, d));
    let values: Vec<f64> = (0..fields).map(|_| r.gen_range(0.2..2.0)).collect();
    scramble(&mut store, &mut r);
    run("fm", &mut store, &mut |s| {
        let f = s.param(factors);
        let parts: Vec<(f64, Var)> = (0..fields)
            .map(|i| Ok((values[i], s.graph.gather_rows(f, &(i * n..(i + 1) * n).collect::<Vec<_>>())?)))
            .collect::<Result<_>>()?;
        let y = fm.forward(s, &parts)?;
        project(s, y, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let gru = GruCell::new(&mut store, "gru", d, &mut r);
    let h = store.add("h", random(&mut r, 1, d));
    let xs = store.add("xs", random(&mut r, 2, d));
    scramble(&mut store, &mut r);
    run("gru", &mut store, &mut |s| {
        let (h0, x) = (s.param(h), s.param(xs));
        let x0 = s.graph.gather_rows(x, &[0])?;
        let x1 = s.graph.gather_rows(x, &[1])?;
        let h1 = gru.forward(s, h0, x0)?;
        let h2 = gru.forward(s, h1, x1)?;
        project(s, h2, &mut rng::seeded(proj_seed))
    });

    let mut store = ParamStore::new();
    let tasks = r.gen_range(2..=3);
    let hidden: Vec<usize> = (0..r.gen_range(0..=2)).map(|_| r.gen_range(1..=5)).collect();
    let mmoe = Mmoe::new(&mut store, "mmoe", d + 1, r.gen_range(1..=4), r.gen_range(1..=5), tasks, &hidden, &mut r).unwrap();
    let f = store.add("f", random(&mut r, n, d + 1));
    scramble(&mut store, &mut r);
    run("mmoe", &mut store, &mut |s| {
        let fv = s.param(f);
        let outs = mmoe.forward(s, fv)?;
        let mut total = project(s, outs[0], &mut rng::seeded(proj_seed))?;
        for (k, &o) in outs.iter().enumerate().skip(1) {
            let p = project(s, o, &mut rng::seeded(proj_seed + k as u64))?;
            total = s.graph.add(total, p)?;
        }
        Ok(total)
    });
    out
}

fn session_loss_report(seed: u64) -> GradCheckReport {
    let mut r = rng::seeded(seed ^ 0x5e55);
    let heads = r.gen_range(1..=2);
    let cfg = ModelConfig {
        embedding_dim: heads * r.gen_range(1..=2),
        heads,
        experts: r.gen_range(1..=3),
        expert_dim: r.gen_range(1..=5),
        tower_hidden: (0..r.gen_range(0..=2)).map(|_| r.gen_range(1..=6)).collect(),
        tasks: r.gen_range(2..=3),
        max_position: r.gen_range(1..=4),
        max_history: r.gen_range(1..=3),
        use_gru: r.gen_bool(0.75),
        use_self_attention: r.gen_bool(0.75),
        use_position: r.gen_bool(0.75),
        click_only: r.gen_bool(0.2),
        ..ModelConfig::new(3, 7)
    };
    let click_only = cfg.click_only;
    let mut model = Model::new(cfg, seed).unwrap();
    scramble(model.params_mut(), &mut r);
    let sessions: Vec<SessionInput> = (0..r.gen_range(1..=3))
        .map(|_| {
            let hist = (0..r.gen_range(0..=4)).map(|_| r.gen_range(0..7)).collect();
            let items = (0..r.gen_range(1..=5)).map(|_| r.gen_range(0..7)).collect();
            SessionInput::new(r.gen_range(0..3), hist, items)
        })
        .collect();
    let mut clicks = Vec::new();
    let mut scrolls = Vec::new();
    for s in &sessions {
        for t in 0..s.len() {
            clicks.push(r.gen_range(0..2) as f64);
            scrolls.push(if t + 1 < s.len() { 1.0 } else { r.gen_range(0..2) as f64 });
        }
    }
    let refs: Vec<&SessionInput> = sessions.iter().collect();
    model
        .check_gradients(STEP, |p| {
            let l = p.forward_batch(&refs)?;
            let c = p.scope.graph.bce_with_logits(l.click, &clicks)?;
            if click_only {
                return Ok(c);
            }
            let s = p.scope.graph.bce_with_logits(l.scroll, &scrolls)?;
            p.scope.graph.add(c, s)
        })
        .unwrap()
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut coords = 0usize;
    let mut skipped = 0usize;
    for seed in 0..CONFIGS {
        let mut reports = layer_reports(seed);
        reports.push(("session_loss", session_loss_report(seed)));
        for (name, rep) in reports {
            coords += rep.coordinates;
            skipped += rep.skipped;
            if rep.max_rel_error > worst.0 || worst.1.is_empty() {
                worst = (rep.max_rel_error, format!("{name}/{} (config {seed})", rep.worst.unwrap_or_default()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst.0 < TOL && secs < 120.0,
        format!(
            "max rel err {:.2e} at {} over {CONFIGS} configs x 9 checks, {coords} coordinates ({skipped} kink-skipped), {secs:.1}s (limits 1e-4, 120s)",
            worst.0, worst.1
        ),
    )
}
