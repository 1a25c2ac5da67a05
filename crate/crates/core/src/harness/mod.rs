//! Experiment orchestration: configuration, synthetic data, runs, sweeps,
//! exports and manifests.

pub mod config;
pub mod experiment;
pub mod export;
pub mod manifest;
pub mod sweep;
pub mod synthetic;

pub use config::{parse_key_values, Settings};
pub use experiment::{build_examples, embedding_table, mean_accuracy, run_once, run_repetitions};
pub use export::{attention_csv, embeddings_csv, export_attention, export_embeddings};
pub use manifest::{blob_hash, Manifest};
pub use sweep::{comparable_alternatives, run_sweep, CellKey, CellSummary, SweepGrid, SweepReport};
pub use synthetic::{generate_synthetic_corpus, SyntheticConfig, SyntheticCorpus};
