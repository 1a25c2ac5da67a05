//! Plot-ready CSV exports of combined embeddings and neighbor attention.

use std::fs;
use std::path::Path;

use crate::embeddings::EmbeddingTable;
use crate::error::{NapError, Result};
use crate::model::{Example, NapModel};

/// `pair_id,label,e0..e{m-1}`: the combined embedding fed to the output
/// layer, one row per example.
pub fn embeddings_csv(model: &NapModel, examples: &[Example], table: &EmbeddingTable) -> Result<String> {
    let m = model.config.kernels;
    let mut out = String::from("pair_id,label");
    for j in 0..m {
        out.push_str(&format!(",e{j}"));
    }
    out.push('\n');
    for ex in examples {
        let h = model.combined_embedding(ex, table)?;
        out.push_str(&format!("{},{}", ex.id, ex.label as u8));
        for v in h {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `pair_id,neighbor_index,weight`. For per-feature weighting the weight
/// of a neighbor is its attention averaged over embedding dimensions.
/// Examples without a neighbor context contribute no rows.
pub fn attention_csv(model: &NapModel, examples: &[Example], table: &EmbeddingTable) -> Result<String> {
    let mut out = String::from("pair_id,neighbor_index,weight\n");
    for ex in examples {
        if let Some(ctx) = model.context_embedding(ex, table)? {
            for (i, w) in ctx.attention.neighbor_weights().iter().enumerate() {
                out.push_str(&format!("{},{i},{w}\n", ex.id));
            }
        }
    }
    Ok(out)
}

pub fn export_embeddings(
    model: &NapModel,
    examples: &[Example],
    table: &EmbeddingTable,
    path: &Path,
) -> Result<()> {
    let csv = embeddings_csv(model, examples, table)?;
    fs::write(path, csv).map_err(|e| NapError::io(path, e))
}

pub fn export_attention(
    model: &NapModel,
    examples: &[Example],
    table: &EmbeddingTable,
    path: &Path,
) -> Result<()> {
    let csv = attention_csv(model, examples, table)?;
    fs::write(path, csv).map_err(|e| NapError::io(path, e))
}
