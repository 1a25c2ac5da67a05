//! Run the preprocessing pipeline on a JSONL corpus: filtering, the
//! chronological split, vocabulary, encoding and neighbor pairs.
//!
//! ```text
//! cargo run --example preprocess_corpus -- [CORPUS.jsonl]
//! ```
//!
//! Without an argument a synthetic corpus is generated first.

use std::path::PathBuf;

use nap::baselines::SentimentLexicon;
use nap::context::NeighborScheme;
use nap::corpus::{assemble_dataset, prepare_corpus, read_corpus_jsonl, Partition, PrepareConfig};
use nap::harness::{generate_synthetic_corpus, SyntheticConfig};

fn main() -> nap::Result<()> {
    let scratch = tempfile::tempdir().map_err(|e| nap::NapError::io(std::env::temp_dir(), e))?;
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = scratch.path().join("corpus.jsonl");
            generate_synthetic_corpus(&SyntheticConfig { items: 12, ..Default::default() })?
                .write_corpus(&p)?;
            p
        }
    };

    let items = read_corpus_jsonl(&path)?;
    let raw: usize = items.iter().map(|i| i.len()).sum();
    println!("read {} items with {raw} reviews", items.len());

    let prepared = prepare_corpus(items, &PrepareConfig::default(), &SentimentLexicon::bundled())?;
    println!("kept {} items, vocabulary of {} terms", prepared.items.len(), prepared.vocab.len());
    for p in Partition::ALL {
        println!("  {:>5}: {} reviews", p.name(), prepared.reviews(p).count());
    }

    let first = prepared.reviews(Partition::Train).next().expect("a training review");
    let words: Vec<&str> = first.tokens.iter().take(12).filter_map(|&t| prepared.vocab.token(t)).collect();
    println!("first training review {} ({:?}): {} ...", first.review_id, first.label, words.join(" "));

    for scheme in NeighborScheme::ALL {
        let split = assemble_dataset(&prepared, scheme, 4, 0)?;
        println!(
            "{scheme} K=4: balanced pairs train/val/test {}/{}/{}",
            split.train.len(),
            split.validation.len(),
            split.test.len()
        );
    }
    let split = assemble_dataset(&prepared, NeighborScheme::Surrounding, 4, 0)?;
    let pair = &split.train[0];
    let ids: Vec<&str> = pair.neighbors.iter().map(|n| n.review_id.as_str()).collect();
    println!("pair {}: target {} neighbors {}", pair.id, pair.target.review_id, ids.join(", "));
    Ok(())
}
