//! Criteria 8 and 9: position statistics and reproducibility through the
//! command line.

use std::path::Path;
use std::process::Command;

use feedctx::dataio::{read_checkpoint, read_sessions, split_holdout, write_checkpoint, SessionRecord, TrainingMeta};
use feedctx_core::{train, Model, ModelConfig, SessionInput, TrainConfig};

use crate::common::{fixture, Outcome};

fn feedctx(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_feedctx")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "feedctx {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn position_statistics() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("world.jsonl");
    let world = fixture("world.cfg");
    feedctx(&["gen-data", "--gt", p(&world), "--sessions", "20000", "--seed", "8", "--out", p(&data)]);
    let csv = String::from_utf8(feedctx(&["stats", "--data", p(&data)]).stdout).unwrap();
    let mut lines = csv.lines();
    let header_ok = lines.next() == Some("position,views,clicks,ctr");
    let rows: Vec<(u64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[0].0 >= w[1].0);
    let dip = rows.len() > 2 && rows[0].1 < rows[1].1;
    let head: Vec<String> = rows.iter().take(4).map(|(v, c)| format!("{v}/{c:.3}")).collect();
    Outcome::new(
        header_ok && monotone && dip,
        format!("views non-increasing: {monotone}, ctr[0] < ctr[1]: {dip}; views/ctr at positions 0-3: {}", head.join(" ")),
    )
}

const SMALL_MODEL: [&str; 12] = [
    "--set", "embedding_dim=8", "--set", "experts=2", "--set", "expert_dim=8", "--set", "tower_hidden=8", "--set",
    "n_users=200", "--set", "n_items=60",
];

pub fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    let world = fixture("world.cfg");
    for name in ["a.jsonl", "b.jsonl"] {
        feedctx(&["gen-data", "--gt", p(&world), "--sessions", "800", "--seed", "9", "--out", p(&d(name))]);
    }
    let data_same = std::fs::read(d("a.jsonl")).unwrap() == std::fs::read(d("b.jsonl")).unwrap();

    let data = d("a.jsonl");
    for name in ["a", "b"] {
        let ck = d(&format!("{name}.ckpt"));
        let metrics = d(&format!("{name}.csv"));
        let mut args = vec!["train", "--data", p(&data)];
        let (ck_s, m_s) = (p(&ck).to_string(), p(&metrics).to_string());
        args.extend(["--out", &ck_s, "--metrics", &m_s, "--seed", "5", "--epochs", "2"]);
        args.extend(SMALL_MODEL);
        feedctx(&args);
    }
    let ck_same = std::fs::read(d("a.ckpt")).unwrap() == std::fs::read(d("b.ckpt")).unwrap();
    let metrics_same = std::fs::read(d("a.csv")).unwrap() == std::fs::read(d("b.csv")).unwrap();

    // The same training in process, then through the checkpoint file.
    let records = read_sessions(d("a.jsonl")).unwrap();
    let (tr, ho) = split_holdout(&records, 5);
    let inputs = |r: &[SessionRecord]| -> Vec<SessionInput> { r.iter().map(SessionRecord::to_input).collect() };
    let cfg = ModelConfig { embedding_dim: 8, experts: 2, expert_dim: 8, tower_hidden: vec![8], ..ModelConfig::new(200, 60) };
    let tc = TrainConfig { epochs: 2, seed: 5, ..TrainConfig::default() };
    let in_memory = train(Model::new(cfg, 5).unwrap(), &inputs(&tr), &inputs(&ho), &tc).unwrap().model;
    let (from_cli, _) = read_checkpoint(d("a.ckpt")).unwrap();
    write_checkpoint(d("again.ckpt"), &in_memory, TrainingMeta::default()).unwrap();
    let (reloaded, _) = read_checkpoint(d("again.ckpt")).unwrap();
    let all = inputs(&records);
    let outputs_same = all.iter().all(|s| {
        let want = in_memory.session_logits(s).unwrap();
        reloaded.session_logits(s).unwrap() == want && from_cli.session_logits(s).unwrap() == want
    });
    Outcome::new(
        data_same && ck_same && metrics_same && outputs_same,
        format!(
            "gen-data byte-identical: {data_same}; train checkpoints byte-identical: {ck_same}; metrics identical: {metrics_same}; roundtrip logits bitwise equal on {} sessions: {outputs_same}",
            all.len()
        ),
    )
}
