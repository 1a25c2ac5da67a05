use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{NapError, Result};

/// Record of one command invocation: its effective settings, the seeds it
/// used and content hashes of the files it read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub settings: BTreeMap<String, serde_json::Value>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<InputHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Git-style blob hash: SHA-256 over `blob <len>\0<content>`.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

/// Hash a file, or every file below a directory in sorted path order.
pub fn hash_path(path: &Path) -> Result<Vec<InputHash>> {
    let meta = fs::metadata(path).map_err(|e| NapError::io(path, e))?;
    if meta.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| NapError::io(path, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| NapError::io(path, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        let mut out = Vec::new();
        for e in entries {
            out.extend(hash_path(&e)?);
        }
        Ok(out)
    } else {
        let bytes = fs::read(path).map_err(|e| NapError::io(path, e))?;
        Ok(vec![InputHash {
            path: path.to_owned(),
            sha256: blob_hash(&bytes),
        }])
    }
}

impl Manifest {
    pub fn new(command: &str, settings: BTreeMap<String, serde_json::Value>, seeds: Vec<u64>) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            settings,
            seeds,
            inputs: vec![],
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.extend(hash_path(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| NapError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_of_empty_content() {
        // sha256 of the 7 bytes "blob 0\0"
        assert_eq!(
            blob_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
