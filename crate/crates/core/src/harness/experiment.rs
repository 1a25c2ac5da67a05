//! One-call helpers that go from a prepared corpus to trained runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{assemble_dataset, PreparedCorpus};
use crate::embeddings::{load_embedding_table, EmbeddingTable};
use crate::error::Result;
use crate::model::{make_variant, train, ExampleSplit, ModelConfig, NapModel, RunResult, TrainConfig};

use super::config::Settings;

/// Mixed into the run seed for the `I+R`/`I+N` draws so they do not share
/// a stream with class balancing.
const VARIANT_SALT: u64 = 0x7a11_d0c5;

/// Pairs for `cfg`, balanced with `seed`. Variants that ignore neighbors
/// still use the configured neighbor scheme and `K`, so every variant is
/// evaluated on the same target reviews.
pub fn build_examples(corpus: &PreparedCorpus, cfg: &ModelConfig, seed: u64) -> Result<ExampleSplit> {
    let split = assemble_dataset(corpus, cfg.neighbor_scheme, cfg.k, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ VARIANT_SALT);
    make_variant(&split, cfg, &mut rng)
}

/// The frozen lookup table for `corpus`: pretrained vectors when a file is
/// configured, otherwise a seeded random table.
pub fn embedding_table(corpus: &PreparedCorpus, settings: &Settings) -> Result<EmbeddingTable> {
    let dim = settings.model.dim;
    match &settings.embeddings {
        Some(path) => load_embedding_table(path, &corpus.vocab, dim, settings.seed),
        None => Ok(EmbeddingTable::random(&corpus.vocab, dim, settings.seed)),
    }
}

/// Build pairs, initialize and train one model, all from `seed`.
pub fn run_once(
    corpus: &PreparedCorpus,
    table: &EmbeddingTable,
    cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    seed: u64,
) -> Result<RunResult> {
    let data = build_examples(corpus, cfg, seed)?;
    let model = NapModel::initialize(cfg.clone(), seed)?;
    let run_cfg = TrainConfig {
        seed,
        ..train_cfg.clone()
    };
    train(model, &data, &run_cfg, table)
}

/// `train_cfg.repetitions` runs with seeds `seed, seed + 1, ...`, in
/// parallel. Results come back in seed order.
pub fn run_repetitions(
    corpus: &PreparedCorpus,
    table: &EmbeddingTable,
    cfg: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<Vec<RunResult>> {
    (0..train_cfg.repetitions as u64)
        .into_par_iter()
        .map(|r| run_once(corpus, table, cfg, train_cfg, train_cfg.seed + r))
        .collect()
}

pub fn mean_accuracy(runs: &[RunResult]) -> f64 {
    if runs.is_empty() {
        return f64::NAN;
    }
    runs.iter().map(|r| r.test_accuracy).sum::<f64>() / runs.len() as f64
}
