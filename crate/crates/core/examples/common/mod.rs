//! Helpers shared by the examples: a synthetic corpus prepared in a
//! scratch directory.
#![allow(dead_code)]

use nap::baselines::SentimentLexicon;
use nap::corpus::{prepare_corpus, read_corpus_jsonl, PrepareConfig, PreparedCorpus};
use nap::embeddings::{load_embedding_table, EmbeddingTable};
use nap::harness::{generate_synthetic_corpus, SyntheticConfig};

pub struct Workspace {
    pub dir: tempfile::TempDir,
    pub corpus: PreparedCorpus,
    pub table: EmbeddingTable,
}

/// Generate, write, read back and prepare a synthetic corpus, then load its
/// word vectors as the embedding table.
pub fn synthetic_workspace(cfg: &SyntheticConfig) -> nap::Result<Workspace> {
    let dir = tempfile::tempdir().map_err(|e| nap::NapError::io(std::env::temp_dir(), e))?;
    let syn = generate_synthetic_corpus(cfg)?;
    let corpus_path = dir.path().join("corpus.jsonl");
    let vectors_path = dir.path().join("vectors.txt");
    syn.write_corpus(&corpus_path)?;
    syn.write_vectors(&vectors_path)?;
    let items = read_corpus_jsonl(&corpus_path)?;
    let corpus = prepare_corpus(items, &PrepareConfig::default(), &SentimentLexicon::bundled())?;
    let table = load_embedding_table(&vectors_path, &corpus.vocab, cfg.dim, cfg.seed)?;
    Ok(Workspace { dir, corpus, table })
}
