//! Compare model variants on one synthetic corpus: the review alone, its
//! neighbors alone, both together, and two controls that replace the
//! neighbors with random reviews or noise.
//!
//! ```text
//! cargo run --release --example variants -- [RHO]
//! ```

mod common;

use nap::harness::{mean_accuracy, run_once, SyntheticConfig};
use nap::model::{ModelConfig, TrainConfig};

fn main() -> nap::Result<()> {
    let rho = std::env::args().nth(1).map_or(Ok(0.8), |s| s.parse()).expect("RHO is a number");
    let ws = common::synthetic_workspace(&SyntheticConfig {
        rho,
        items: 30,
        ..SyntheticConfig::default()
    })?;
    let base = ModelConfig {
        dim: 16,
        kernels: 16,
        k: 4,
        gamma: 0.2,
        ..ModelConfig::default()
    };
    let train_cfg = TrainConfig::default();
    println!("rho = {rho}");
    for code in ["I", "P", "F", "S", "I+P", "I+F", "I+S", "I+R", "I+N", "I+CON"] {
        let cfg = base.for_variant(code.parse()?);
        let runs = (0..2)
            .map(|seed| run_once(&ws.corpus, &ws.table, &cfg, &train_cfg, seed))
            .collect::<nap::Result<Vec<_>>>()?;
        println!("{code:>6}: mean test accuracy {:.4}", mean_accuracy(&runs));
    }
    Ok(())
}
