use rayon::prelude::*;

use nap::baselines::SentimentLexicon;
use nap::corpus::{prepare_corpus, read_corpus_jsonl, PrepareConfig};
use nap::embeddings::load_embedding_table;
use nap::harness::{generate_synthetic_corpus, run_once, SyntheticConfig};
use nap::model::{ModelConfig, TrainConfig};

/// Mean accuracy gain of `I+S` over `I` at neighbor strength `rho`.
fn contextual_advantage(rho: f64) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let syn = generate_synthetic_corpus(&SyntheticConfig {
        rho,
        items: 30,
        reviews_per_item: 100,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let vectors = dir.path().join("vectors.txt");
    syn.write_corpus(&corpus).unwrap();
    syn.write_vectors(&vectors).unwrap();
    let prepared = prepare_corpus(
        read_corpus_jsonl(&corpus).unwrap(),
        &PrepareConfig::default(),
        &SentimentLexicon::bundled(),
    )
    .unwrap();
    let table = load_embedding_table(&vectors, &prepared.vocab, 16, 1).unwrap();
    let base = ModelConfig {
        dim: 16,
        kernels: 16,
        gamma: 0.2,
        ..ModelConfig::default()
    };
    let jobs: Vec<(&str, u64)> = ["I", "I+S"]
        .into_iter()
        .flat_map(|v| (0..3).map(move |s| (v, s)))
        .collect();
    let accs: Vec<(&str, f64)> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            let cfg = base.for_variant(v.parse().unwrap());
            let run = run_once(&prepared, &table, &cfg, &TrainConfig::default(), seed).unwrap();
            (v, run.test_accuracy)
        })
        .collect();
    let mean = |code| accs.iter().filter(|(v, _)| *v == code).map(|(_, a)| a).sum::<f64>() / 3.0;
    mean("I+S") - mean("I")
}

#[test]
fn neighbor_advantage_grows_with_rho() {
    let gains: Vec<f64> = [0.0, 0.5, 1.0].into_iter().map(contextual_advantage).collect();
    assert!(gains[0] < gains[1] && gains[1] < gains[2], "gains {gains:?}");
    assert!(gains[2] > 0.05, "gains {gains:?}");
}
