//! Train briefly, then write the combined embedding and the per-neighbor
//! attention of every test pair as CSV for plotting.
//!
//! ```text
//! cargo run --release --example export_embeddings -- [OUT_DIR]
//! ```

mod common;

use std::path::PathBuf;

use nap::context::{NeighborScheme, WeightingScheme};
use nap::harness::{build_examples, export_attention, export_embeddings, SyntheticConfig};
use nap::model::{train, ModelConfig, NapModel, TrainConfig, Variant};

fn head(path: &std::path::Path, n: usize) {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    for line in text.lines().take(n) {
        let shown: String = line.chars().take(100).collect();
        println!("  {shown}");
    }
}

fn main() -> nap::Result<()> {
    let ws = common::synthetic_workspace(&SyntheticConfig {
        items: 20,
        ..SyntheticConfig::default()
    })?;
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| ws.dir.path().join("export"), PathBuf::from);
    std::fs::create_dir_all(&out).map_err(|e| nap::NapError::io(&out, e))?;

    let cfg = ModelConfig {
        dim: 16,
        kernels: 8,
        k: 4,
        weighting: WeightingScheme::Wavg,
        gamma: 0.2,
        ..ModelConfig::default().for_variant(Variant::Contextual(NeighborScheme::Surrounding))
    };
    let data = build_examples(&ws.corpus, &cfg, 0)?;
    let run = train(
        NapModel::initialize(cfg, 0)?,
        &data,
        &TrainConfig {
            max_epochs: 15,
            ..TrainConfig::default()
        },
        &ws.table,
    )?;
    let model = run.model.expect("trained model");

    let emb = out.join("embeddings.csv");
    let att = out.join("attention.csv");
    export_embeddings(&model, &data.test, &ws.table, &emb)?;
    export_attention(&model, &data.test, &ws.table, &att)?;
    println!("{} test pairs, accuracy {:.4}", data.test.len(), run.test_accuracy);
    println!("{}:", emb.display());
    head(&emb, 3);
    println!("{}:", att.display());
    head(&att, 9);
    Ok(())
}
