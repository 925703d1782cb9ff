//! The `feedctx` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use feedctx_core::simulator::GroundTruth;
use feedctx_core::{
    evaluate, generate_slate, rng, train, CandidateSet, GenerationOptions, GroundTruthConfig, Model, ModelConfig,
    SessionInput, TrainConfig,
};

use crate::dataio::{
    is_holdout, read_checkpoint, read_sessions, render_sessions, split_holdout, write_checkpoint, write_stats_csv,
    position_stats, SessionRecord, TrainingMeta,
};
use crate::kv;

#[derive(Debug, Parser)]
#[command(name = "feedctx", version, about = "Session-context feed ranking: simulate, train, evaluate, rank")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample labelled sessions from a ground-truth config.
    GenData(GenDataArgs),
    /// Train a model and write a checkpoint plus per-epoch metrics.
    Train(TrainArgs),
    /// Click and scroll AUC of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Greedy slate for one user over a candidate list.
    Rank(RankArgs),
    /// Exact and Monte-Carlo expected views plus clicks of an ordering.
    Simulate(SimulateArgs),
    /// Views, clicks and CTR per position as CSV.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// key=value file; explicit --set assignments override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. --set drift=0.5. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self, file: Option<&Path>) -> Result<BTreeMap<String, String>> {
        let mut map = BTreeMap::new();
        if let Some(path) = file.or(self.config.as_deref()) {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            map = kv::parse_kv(&text).with_context(|| format!("in {}", path.display()))?;
        }
        for s in &self.set {
            let (k, v) = kv::parse_assignment(s).map_err(anyhow::Error::msg)?;
            map.insert(k, v);
        }
        Ok(map)
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Ground-truth key=value file.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigArgs,
    #[arg(long)]
    pub sessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Separate held-out file; without it 10% of --data is held out.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch CSV: epoch,loss,auc_ctr,auc_scr,seed.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    All,
    Train,
    Holdout,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Which part of the seeded 90/10 split to score.
    #[arg(long, value_enum, default_value_t = Split::All)]
    pub split: Split,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CandidateArgs {
    /// File of whitespace or comma separated item ids.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Inline comma separated item ids.
    #[arg(long)]
    pub items: Option<String>,
}

impl CandidateArgs {
    fn load(&self) -> Result<Option<Vec<usize>>> {
        match (&self.candidates, &self.items) {
            (Some(_), Some(_)) => bail!("give either --candidates or --items, not both"),
            (Some(p), None) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(Some(parse_ids(&text)?))
            }
            (None, Some(s)) => Ok(Some(parse_ids(s)?)),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub user: usize,
    /// Comma separated long-term history.
    #[arg(long, default_value = "")]
    pub history: String,
    #[command(flatten)]
    pub candidates: CandidateArgs,
    #[arg(long, default_value_t = 15)]
    pub max_slate: usize,
    /// Weight of the click logit against the scroll logit.
    #[arg(long, default_value_t = 1.0)]
    pub click_weight: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigArgs,
    /// Fixed ordering, comma separated.
    #[arg(long)]
    pub ordering: Option<String>,
    /// Rank candidates with this checkpoint instead of a fixed ordering.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub candidates: CandidateArgs,
    /// Evaluate one user; all users with a pooled summary when absent.
    #[arg(long)]
    pub user: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_ids(text: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("bad item id `{s}`")))
        .collect()
}

fn log_resolved(section: &str, text: &str) {
    eprintln!("# resolved {section}");
    eprint!("{text}");
}

fn ground_truth(file: Option<&Path>, overrides: &ConfigArgs) -> Result<GroundTruth> {
    let map = overrides.resolve(file)?;
    let cfg: GroundTruthConfig = kv::ground_truth_from_kv(&map)?;
    log_resolved("ground truth", &kv::render_ground_truth(&cfg));
    Ok(GroundTruth::new(cfg)?)
}

fn to_inputs(records: &[SessionRecord]) -> Vec<SessionInput> {
    records.iter().map(SessionRecord::to_input).collect()
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let gt = ground_truth(a.gt.as_deref(), &a.overrides)?;
    eprintln!("sessions = {}\nrun_seed = {}", a.sessions, a.seed);
    let data = gt.generate_dataset(a.sessions, a.seed)?;
    let records = data.iter().map(SessionRecord::from_input).collect::<Result<Vec<_>, _>>()?;
    std::fs::write(&a.out, render_sessions(&records)).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn vocab(records: &[SessionRecord]) -> (usize, usize) {
    let users = records.iter().map(|r| r.user_id).max().unwrap_or(0) + 1;
    let items = records
        .iter()
        .flat_map(|r| r.user_hist.iter().copied().chain(r.events.iter().map(|e| e.item)))
        .max()
        .unwrap_or(0)
        + 1;
    (users, items)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let records = read_sessions(&a.data)?;
    if records.is_empty() {
        bail!("{}: no sessions", a.data.display());
    }
    let (train_recs, hold_recs) = match &a.holdout {
        Some(p) => (records, read_sessions(p)?),
        None => split_holdout(&records, a.seed.unwrap_or(0)),
    };
    let (n_users, n_items) = vocab(&train_recs.iter().chain(&hold_recs).cloned().collect::<Vec<_>>());
    let mut model_cfg = ModelConfig::new(n_users, n_items);
    let mut train_cfg = TrainConfig::default();
    for (k, v) in a.overrides.resolve(None)? {
        if !kv::apply_model(&mut model_cfg, &k, &v)? && !kv::apply_train(&mut train_cfg, &k, &v)? {
            return Err(crate::DataError::UnknownKey(k).into());
        }
    }
    if let Some(s) = a.seed {
        train_cfg.seed = s;
    }
    if let Some(e) = a.epochs {
        train_cfg.epochs = e;
    }
    log_resolved("model", &kv::render_model(&model_cfg));
    log_resolved("training", &kv::render_train(&train_cfg));
    let model = Model::new(model_cfg, train_cfg.seed)?;
    let outcome = train(model, &to_inputs(&train_recs), &to_inputs(&hold_recs), &train_cfg)?;
    if let Some(path) = &a.metrics {
        let mut csv = String::from("epoch,loss,auc_ctr,auc_scr,seed\n");
        for e in &outcome.epochs {
            let (c, s) = e.holdout.as_ref().map_or((None, None), |m| (m.auc_ctr, m.auc_scr));
            csv.push_str(&format!("{},{},{},{},{}\n", e.epoch, e.loss, opt(c), opt(s), train_cfg.seed));
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    let best = outcome.epochs.get(outcome.best_epoch);
    let meta = TrainingMeta {
        seed: train_cfg.seed,
        epoch: outcome.best_epoch,
        loss: best.map(|e| e.loss),
        auc_ctr: best.and_then(|e| e.holdout.as_ref()).and_then(|m| m.auc_ctr),
        auc_scr: best.and_then(|e| e.holdout.as_ref()).and_then(|m| m.auc_scr),
    };
    write_checkpoint(&a.out, &outcome.model, meta)?;
    Ok(())
}

fn eval_cmd(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let (model, _) = read_checkpoint(&a.checkpoint)?;
    let records = read_sessions(&a.data)?;
    let picked: Vec<SessionInput> = records
        .iter()
        .enumerate()
        .filter(|(i, _)| match a.split {
            Split::All => true,
            Split::Holdout => is_holdout(*i, a.seed),
            Split::Train => !is_holdout(*i, a.seed),
        })
        .map(|(_, r)| r.to_input())
        .collect();
    eprintln!("split = {:?}\nrun_seed = {}", a.split, a.seed);
    let report = evaluate(&model, &picked, a.seed)?;
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    Ok(())
}

fn rank_cmd(a: &RankArgs, out: &mut dyn Write) -> Result<()> {
    let (model, _) = read_checkpoint(&a.checkpoint)?;
    let items = a.candidates.load()?.context("no candidates: give --candidates or --items")?;
    let history = parse_ids(&a.history)?;
    let options = GenerationOptions { max_slate: a.max_slate, click_weight: a.click_weight };
    let slate = generate_slate(&model, a.user, &history, &CandidateSet::new(items)?, &options)?;
    for (item, score) in slate.items.iter().zip(&slate.scores) {
        writeln!(out, "{item}\t{score}")?;
    }
    Ok(())
}

fn simulate_cmd(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let gt = ground_truth(a.gt.as_deref(), &a.overrides)?;
    let model = a.checkpoint.as_ref().map(read_checkpoint).transpose()?.map(|(m, _)| m);
    let fixed = a.ordering.as_deref().map(parse_ids).transpose()?;
    let candidates = a.candidates.load()?;
    let users: Vec<usize> = match a.user {
        Some(u) => vec![u],
        None => (0..gt.n_users()).collect(),
    };
    eprintln!("samples = {}\nrun_seed = {}", a.samples, a.seed);
    let mut exact_sum = 0.0;
    let mut mc_sum = 0.0;
    for &u in &users {
        let ordering = match (&fixed, &model, &candidates) {
            (Some(o), None, None) => o.clone(),
            (None, Some(m), Some(c)) => {
                let history = gt.user_history(u)?;
                generate_slate(m, u, &history, &CandidateSet::new(c.clone())?, &GenerationOptions::default())?.items
            }
            _ => bail!("give either --ordering, or --checkpoint with candidates"),
        };
        let mut r = rng::stream(a.seed, u as u64);
        let report = gt.user(u)?.expected_value_mc(&ordering, a.samples, &mut r)?;
        exact_sum += report.exact_v.unwrap_or(f64::NAN);
        mc_sum += report.mc_v;
        let mut line = serde_json::to_value(&report)?;
        line["user"] = u.into();
        writeln!(out, "{line}")?;
    }
    if a.user.is_none() {
        let n = users.len() as f64;
        let pooled = serde_json::json!({
            "users": users.len(),
            "mean_exact_v": exact_sum / n,
            "mean_mc_v": mc_sum / n,
        });
        writeln!(out, "{pooled}")?;
    }
    Ok(())
}

fn stats_cmd(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let rows = position_stats(&read_sessions(&a.data)?)?;
    match &a.out {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
            write_stats_csv(std::io::BufWriter::new(f), &rows)?;
        }
        None => write_stats_csv(out, &rows)?,
    }
    Ok(())
}

/// Execute a parsed command, writing results to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a, out),
        Command::Rank(a) => rank_cmd(a, out),
        Command::Simulate(a) => simulate_cmd(a, out),
        Command::Stats(a) => stats_cmd(a, out),
    }
}

/// Parse `args` and run. Returns the process exit code: 0 on success,
/// 2 on usage errors and 1 on any other failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            1
        }
    }
}
