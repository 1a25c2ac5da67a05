use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, NapModel};
use crate::error::{NapError, Result};

pub const CHECKPOINT_FORMAT: &str = "nap-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Trained parameters with the configuration that produced them. The
/// embedding checksum ties a checkpoint to the frozen lookup table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub embedding_checksum: String,
    pub tensors: Vec<NamedTensor>,
}

fn shape_of(cfg: &ModelConfig, name: &str, len: usize) -> Vec<usize> {
    match name {
        "conv.weight" => vec![cfg.window, cfg.dim, cfg.kernels],
        "context.weight" if len == cfg.kernels => vec![cfg.kernels],
        "context.weight" => vec![cfg.k, cfg.kernels],
        _ => vec![len],
    }
}

impl Checkpoint {
    pub fn from_model(model: &NapModel, embedding_checksum: impl Into<String>) -> Self {
        let tensors = model
            .params
            .tensors()
            .into_iter()
            .map(|(name, data)| NamedTensor {
                name: name.to_owned(),
                shape: shape_of(&model.config, name, data.len()),
                data: data.to_vec(),
            })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            version: CHECKPOINT_VERSION,
            config: model.config.clone(),
            embedding_checksum: embedding_checksum.into(),
            tensors,
        }
    }

    /// Rebuild the model, checking every tensor's name and shape against
    /// the stored configuration.
    pub fn into_model(self) -> Result<NapModel> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(NapError::data(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let mut params = super::Params::zeros(&self.config);
        let expected: Vec<(String, usize)> = params
            .tensors()
            .into_iter()
            .map(|(n, t)| (n.to_owned(), t.len()))
            .collect();
        if expected.len() != self.tensors.len() {
            return Err(NapError::shape(format!(
                "checkpoint has {} tensors, configuration needs {}",
                self.tensors.len(),
                expected.len()
            )));
        }
        for ((name, len), t) in expected.iter().zip(&self.tensors) {
            let numel: usize = t.shape.iter().product();
            if &t.name != name || t.data.len() != *len || numel != *len {
                return Err(NapError::shape(format!(
                    "tensor {} with shape {:?} does not match {name} of size {len}",
                    t.name, t.shape
                )));
            }
        }
        for (dst, t) in params.tensors_mut().into_iter().zip(&self.tensors) {
            dst.copy_from_slice(&t.data);
        }
        NapModel::from_params(self.config, params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| NapError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| NapError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
