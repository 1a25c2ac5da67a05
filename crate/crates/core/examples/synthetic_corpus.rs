//! Generate a synthetic review corpus with matching word vectors and show
//! how the neighbor strength `rho` shapes the labels.
//!
//! ```text
//! cargo run --example synthetic_corpus -- [OUT_DIR]
//! ```

use std::path::PathBuf;

use nap::corpus::label_votes;
use nap::harness::{generate_synthetic_corpus, SyntheticConfig};

fn main() -> nap::Result<()> {
    for rho in [0.0, 0.5, 0.8, 1.0] {
        let syn = generate_synthetic_corpus(&SyntheticConfig {
            rho,
            items: 20,
            ..SyntheticConfig::default()
        })?;
        let (mut good, mut good_helpful, mut bad_helpful) = (0usize, 0usize, 0usize);
        for (rec, &q) in syn.records.iter().zip(&syn.quality) {
            let helpful = label_votes(rec.votes).is_helpful();
            if q {
                good += 1;
                good_helpful += helpful as usize;
            } else {
                bad_helpful += helpful as usize;
            }
        }
        let bad = syn.records.len() - good;
        println!(
            "rho={rho:.1}: {} reviews, P(helpful | good)={:.3}, P(helpful | bad)={:.3}",
            syn.records.len(),
            good_helpful as f64 / good as f64,
            bad_helpful as f64 / bad as f64,
        );
    }

    if let Some(out) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&out).map_err(|e| nap::NapError::io(&out, e))?;
        let syn = generate_synthetic_corpus(&SyntheticConfig::default())?;
        syn.write_corpus(&out.join("corpus.jsonl"))?;
        syn.write_vectors(&out.join("vectors.txt"))?;
        println!("wrote corpus.jsonl and vectors.txt to {}", out.display());
    }
    Ok(())
}
