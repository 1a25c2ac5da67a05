//! Train a neighbor-aware model on a synthetic corpus, save the best
//! checkpoint, load it back and score the test pairs.
//!
//! ```text
//! cargo run --release --example train_nap
//! ```

mod common;

use nap::context::{NeighborScheme, WeightingScheme};
use nap::harness::{build_examples, SyntheticConfig};
use nap::model::{evaluate, train, Checkpoint, ModelConfig, NapModel, TrainConfig, Variant};

fn main() -> nap::Result<()> {
    let ws = common::synthetic_workspace(&SyntheticConfig {
        items: 30,
        ..SyntheticConfig::default()
    })?;
    let cfg = ModelConfig {
        dim: 16,
        kernels: 16,
        k: 4,
        weighting: WeightingScheme::Fr,
        gamma: 0.2,
        ..ModelConfig::default().for_variant(Variant::Contextual(NeighborScheme::Surrounding))
    };
    let data = build_examples(&ws.corpus, &cfg, 0)?;
    println!(
        "{} with {} and K={}: {} train, {} validation, {} test pairs",
        cfg.variant,
        cfg.weighting,
        cfg.k,
        data.train.len(),
        data.validation.len(),
        data.test.len()
    );

    let model = NapModel::initialize(cfg, 0)?;
    let run = train(model, &data, &TrainConfig::default(), &ws.table)?;
    for rec in run.history.iter().step_by(5) {
        println!("epoch {:>3}: train {:.4}  val {:.4}", rec.epoch, rec.train_loss, rec.val_loss);
    }
    println!(
        "stopped after {} epochs, best epoch {}, test accuracy {:.4}",
        run.epochs, run.best_epoch, run.test_accuracy
    );

    let path = ws.dir.path().join("checkpoint.json");
    let model = run.model.expect("trained model");
    Checkpoint::from_model(&model, ws.table.checksum()).save(&path)?;
    let restored = Checkpoint::load(&path)?.into_model()?;
    let accuracy = evaluate(&restored, &data.test, &ws.table)?;
    println!("reloaded checkpoint scores {accuracy:.4} on the same test pairs");
    Ok(())
}
