//! Flat `key = value` configuration.
//!
//! One assignment per line; `#` starts a comment. Lists are comma separated
//! and vector lists separate vectors with `;`. The same keys are accepted on
//! the command line as `--set key=value`.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use feedctx_core::{GroundTruthConfig, ModelConfig, TrainConfig};

use crate::DataError;

/// Parse a config file into ordered assignments. Repeated keys are errors.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, DataError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|message| DataError::Parse { line: i + 1, message })?;
        if out.insert(k.clone(), v).is_some() {
            return Err(DataError::Parse { line: i + 1, message: format!("key `{k}` repeated") });
        }
    }
    Ok(out)
}

/// Split `key=value`, trimming both sides.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn bad(key: &str, value: &str) -> DataError {
    DataError::BadValue { key: key.into(), value: value.into() }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, DataError> {
    value.parse().map_err(|_| bad(key, value))
}

fn flag(key: &str, value: &str) -> Result<bool, DataError> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, DataError> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|x| scalar(key, x.trim())).collect()
}

fn vectors(key: &str, value: &str) -> Result<Option<Vec<Vec<f64>>>, DataError> {
    if value.is_empty() || value == "random" {
        return Ok(None);
    }
    value.split(';').map(|v| list(key, v.trim())).collect::<Result<_, _>>().map(Some)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_vectors(v: &Option<Vec<Vec<f64>>>) -> String {
    match v {
        None => "random".into(),
        Some(rows) => rows.iter().map(|r| join(r)).collect::<Vec<_>>().join(";"),
    }
}

/// Set one ground-truth key.
pub fn apply_ground_truth(cfg: &mut GroundTruthConfig, key: &str, value: &str) -> Result<(), DataError> {
    match key {
        "dim" => cfg.dim = scalar(key, value)?,
        "n_users" => cfg.n_users = scalar(key, value)?,
        "n_items" => cfg.n_items = scalar(key, value)?,
        "click_scale" => cfg.click_scale = scalar(key, value)?,
        "click_bias" => cfg.click_bias = list(key, value)?,
        "scroll_scale" => cfg.scroll_scale = scalar(key, value)?,
        "scroll_bias" => cfg.scroll_bias = list(key, value)?,
        "drift" => cfg.drift = scalar(key, value)?,
        "drift_on_click" => cfg.drift_on_click = flag(key, value)?,
        "seed" => cfg.seed = scalar(key, value)?,
        "item_scale" => cfg.item_scale = scalar(key, value)?,
        "users" => cfg.users = vectors(key, value)?,
        "items" => cfg.items = vectors(key, value)?,
        "history_len" => cfg.history_len = scalar(key, value)?,
        "slate_len" => cfg.slate_len = scalar(key, value)?,
        _ => return Err(DataError::UnknownKey(key.into())),
    }
    Ok(())
}

pub fn ground_truth_from_kv(map: &BTreeMap<String, String>) -> Result<GroundTruthConfig, DataError> {
    let mut cfg = GroundTruthConfig::default();
    for (k, v) in map {
        apply_ground_truth(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Every ground-truth key with its value, in a form [`parse_kv`] reads back.
pub fn render_ground_truth(cfg: &GroundTruthConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim = {}", cfg.dim);
    let _ = writeln!(s, "n_users = {}", cfg.n_users);
    let _ = writeln!(s, "n_items = {}", cfg.n_items);
    let _ = writeln!(s, "click_scale = {}", cfg.click_scale);
    let _ = writeln!(s, "click_bias = {}", join(&cfg.click_bias));
    let _ = writeln!(s, "scroll_scale = {}", cfg.scroll_scale);
    let _ = writeln!(s, "scroll_bias = {}", join(&cfg.scroll_bias));
    let _ = writeln!(s, "drift = {}", cfg.drift);
    let _ = writeln!(s, "drift_on_click = {}", cfg.drift_on_click);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "item_scale = {}", cfg.item_scale);
    let _ = writeln!(s, "users = {}", join_vectors(&cfg.users));
    let _ = writeln!(s, "items = {}", join_vectors(&cfg.items));
    let _ = writeln!(s, "history_len = {}", cfg.history_len);
    let _ = writeln!(s, "slate_len = {}", cfg.slate_len);
    s
}

/// Set one model key. Returns `false` when `key` is not a model key.
pub fn apply_model(cfg: &mut ModelConfig, key: &str, value: &str) -> Result<bool, DataError> {
    match key {
        "embedding_dim" => cfg.embedding_dim = scalar(key, value)?,
        "heads" => cfg.heads = scalar(key, value)?,
        "experts" => cfg.experts = scalar(key, value)?,
        "expert_dim" => cfg.expert_dim = scalar(key, value)?,
        "tower_hidden" => cfg.tower_hidden = list(key, value)?,
        "tasks" => cfg.tasks = scalar(key, value)?,
        "max_position" => cfg.max_position = scalar(key, value)?,
        "max_history" => cfg.max_history = scalar(key, value)?,
        "n_users" => cfg.n_users = scalar(key, value)?,
        "n_items" => cfg.n_items = scalar(key, value)?,
        "use_gru" => cfg.use_gru = flag(key, value)?,
        "use_self_attention" => cfg.use_self_attention = flag(key, value)?,
        "use_position" => cfg.use_position = flag(key, value)?,
        "click_only" => cfg.click_only = flag(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn render_model(cfg: &ModelConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "embedding_dim = {}", cfg.embedding_dim);
    let _ = writeln!(s, "heads = {}", cfg.heads);
    let _ = writeln!(s, "experts = {}", cfg.experts);
    let _ = writeln!(s, "expert_dim = {}", cfg.expert_dim);
    let _ = writeln!(s, "tower_hidden = {}", join(&cfg.tower_hidden));
    let _ = writeln!(s, "tasks = {}", cfg.tasks);
    let _ = writeln!(s, "max_position = {}", cfg.max_position);
    let _ = writeln!(s, "max_history = {}", cfg.max_history);
    let _ = writeln!(s, "n_users = {}", cfg.n_users);
    let _ = writeln!(s, "n_items = {}", cfg.n_items);
    let _ = writeln!(s, "use_gru = {}", cfg.use_gru);
    let _ = writeln!(s, "use_self_attention = {}", cfg.use_self_attention);
    let _ = writeln!(s, "use_position = {}", cfg.use_position);
    let _ = writeln!(s, "click_only = {}", cfg.click_only);
    s
}

/// Set one training key. Returns `false` when `key` is not a training key.
pub fn apply_train(cfg: &mut TrainConfig, key: &str, value: &str) -> Result<bool, DataError> {
    match key {
        "epochs" => cfg.epochs = scalar(key, value)?,
        "batch_size" => cfg.batch_size = scalar(key, value)?,
        "lr" => cfg.adam.lr = scalar(key, value)?,
        "beta1" => cfg.adam.beta1 = scalar(key, value)?,
        "beta2" => cfg.adam.beta2 = scalar(key, value)?,
        "epsilon" => cfg.adam.epsilon = scalar(key, value)?,
        "seed" => cfg.seed = scalar(key, value)?,
        "patience" => {
            cfg.patience = match value {
                "none" => None,
                v => Some(scalar(key, v)?),
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn render_train(cfg: &TrainConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "epochs = {}", cfg.epochs);
    let _ = writeln!(s, "batch_size = {}", cfg.batch_size);
    let _ = writeln!(s, "lr = {}", cfg.adam.lr);
    let _ = writeln!(s, "beta1 = {}", cfg.adam.beta1);
    let _ = writeln!(s, "beta2 = {}", cfg.adam.beta2);
    let _ = writeln!(s, "epsilon = {}", cfg.adam.epsilon);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    match cfg.patience {
        Some(p) => {
            let _ = writeln!(s, "patience = {p}");
        }
        None => {
            let _ = writeln!(s, "patience = none");
        }
    }
    s
}
