//! Sweep neighbor count, weighting scheme and combination factor, then
//! list cheaper settings that stay within one accuracy point of the best.
//!
//! ```text
//! cargo run --release --example hyperparameter_sweep -- [OUT_DIR]
//! ```

mod common;

use std::path::PathBuf;

use nap::context::{NeighborScheme, WeightingScheme};
use nap::harness::{run_sweep, SweepGrid, SyntheticConfig};
use nap::model::{ModelConfig, TrainConfig, Variant};

fn main() -> nap::Result<()> {
    let ws = common::synthetic_workspace(&SyntheticConfig {
        items: 20,
        ..SyntheticConfig::default()
    })?;
    let grid = SweepGrid {
        ks: (1..=4).collect(),
        neighbor_schemes: vec![NeighborScheme::Preceding, NeighborScheme::Surrounding],
        weightings: vec![WeightingScheme::Avg, WeightingScheme::Wavg],
        gammas: vec![0.2, 0.5],
        variants: vec![Variant::Contextual(NeighborScheme::Surrounding)],
        ..SweepGrid::default()
    };
    let base = ModelConfig {
        dim: 16,
        kernels: 16,
        ..ModelConfig::default()
    };
    let train_cfg = TrainConfig {
        repetitions: 2,
        ..TrainConfig::default()
    };
    let report = run_sweep(&ws.corpus, &ws.table, &grid, &base, &train_cfg)?;

    for cell in &report.cells {
        println!("{:<40} {:>8}  {:.4}", cell.cell.to_string(), cell.annotation, cell.mean_accuracy);
    }
    for s in &report.skipped {
        println!("skipped {}: {}", s.cell, s.reason);
    }
    if let Some(best) = &report.best {
        println!("\nbest: {} at {:.4}", best.cell, best.mean_accuracy);
    }
    for alt in &report.alternatives {
        println!("  cheaper: {} at {:.4} (-{:.4})", alt.cell, alt.mean_accuracy, alt.drop);
    }

    if let Some(out) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&out).map_err(|e| nap::NapError::io(&out, e))?;
        report.write_json(&out.join("sweep.json"))?;
        report.write_csv(&out.join("sweep.csv"))?;
        println!("wrote sweep.json and sweep.csv to {}", out.display());
    }
    Ok(())
}
