use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use feedctx_core::{Model, ModelConfig, Tensor};
use serde::{Deserialize, Serialize};

use crate::DataError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredTensor {
    pub shape: Vec<usize>,
    /// Row-major.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMeta {
    pub seed: u64,
    /// Epoch whose parameters were kept.
    pub epoch: usize,
    /// Training loss per position of that epoch.
    pub loss: Option<f64>,
    pub auc_ctr: Option<f64>,
    pub auc_scr: Option<f64>,
}

/// A model on disk: format version, configuration, tensors by parameter
/// name, and how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: ModelConfig,
    pub tensors: BTreeMap<String, StoredTensor>,
    pub meta: TrainingMeta,
}

impl Checkpoint {
    pub fn from_model(model: &Model, meta: TrainingMeta) -> Self {
        let tensors = model
            .params()
            .iter()
            .map(|(name, t)| {
                (name.to_string(), StoredTensor { shape: t.shape().to_vec(), values: t.data().to_vec() })
            })
            .collect();
        Self { format_version: FORMAT_VERSION, config: model.config().clone(), tensors, meta }
    }

    pub fn to_model(&self) -> Result<Model, DataError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DataError::Version { found: self.format_version, expected: FORMAT_VERSION });
        }
        let mut named = Vec::with_capacity(self.tensors.len());
        for (name, t) in &self.tensors {
            let tensor = Tensor::new(t.shape.clone(), t.values.clone())
                .map_err(|e| DataError::Checkpoint(format!("tensor `{name}`: {e}")))?;
            named.push((name.clone(), tensor));
        }
        Ok(Model::from_named(self.config.clone(), named)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoints always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::Checkpoint(e.to_string()))
    }
}

/// Write via a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_checkpoint(path: impl AsRef<Path>, model: &Model, meta: TrainingMeta) -> Result<(), DataError> {
    let path = path.as_ref();
    let text = Checkpoint::from_model(model, meta).to_json();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| DataError::io(&tmp, e))?;
    f.write_all(text.as_bytes()).map_err(|e| DataError::io(&tmp, e))?;
    f.sync_all().map_err(|e| DataError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| DataError::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(Model, TrainingMeta), DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let ck = Checkpoint::from_json(&text)?;
    Ok((ck.to_model()?, ck.meta))
}
