//! Synthetic review corpora whose helpfulness labels depend, to a tunable
//! degree, on the quality of the neighboring reviews.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_corpus_jsonl, CorpusRecord, HELPFUL_VOTE_THRESHOLD};
use crate::error::{NapError, Result};
use crate::model::sigmoid;

/// Largest `K` the harness sweeps over; every item must be able to host it.
pub const MAX_NEIGHBORS: usize = 10;
/// Neighbors on each side whose quality shapes a review's label.
pub const LABEL_RADIUS: usize = 2;

const POSITIVE_WORDS: [&str; 6] = ["great", "excellent", "helpful", "reliable", "friendly", "recommend"];
const NEGATIVE_WORDS: [&str; 6] = ["terrible", "awful", "rude", "broken", "refund", "disappointed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub items: usize,
    pub reviews_per_item: usize,
    /// Number of topic words shared out between the two quality classes.
    pub vocab_size: usize,
    /// Weight of neighbor quality in the label, in `[0, 1]`.
    pub rho: f64,
    /// Mean review length in tokens.
    pub review_len: usize,
    /// Slope of the label logit; larger means less label noise.
    pub sharpness: f64,
    /// Width of the generated word vectors.
    pub dim: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            items: 50,
            reviews_per_item: 120,
            vocab_size: 400,
            rho: 0.8,
            review_len: 24,
            sharpness: 6.0,
            dim: 16,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(NapError::config(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if self.reviews_per_item < MAX_NEIGHBORS + 1 {
            return Err(NapError::config(format!(
                "reviews_per_item must be at least {}",
                MAX_NEIGHBORS + 1
            )));
        }
        if self.items == 0 || self.vocab_size < 10 || self.review_len < 4 || self.dim == 0 {
            return Err(NapError::config(
                "items, dim must be positive; vocab_size >= 10; review_len >= 4",
            ));
        }
        if self.sharpness.is_nan() || self.sharpness <= 0.0 {
            return Err(NapError::config("sharpness must be positive"));
        }
        Ok(())
    }
}

/// Generated reviews plus word vectors in GloVe text format.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub records: Vec<CorpusRecord>,
    pub vectors: Vec<(String, Vec<f64>)>,
    /// Latent quality of each record, aligned with `records`.
    pub quality: Vec<bool>,
}

impl SyntheticCorpus {
    pub fn write_corpus(&self, path: &Path) -> Result<()> {
        write_corpus_jsonl(path, &self.records)
    }

    pub fn write_vectors(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (word, v) in &self.vectors {
            out.push_str(word);
            for x in v {
                out.push_str(&format!(" {x:.6}"));
            }
            out.push('\n');
        }
        let mut f = fs::File::create(path).map_err(|e| NapError::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| NapError::io(path, e))
    }
}

fn word(i: usize) -> String {
    format!("w{i:04}")
}

/// Generate a corpus. Every review has a latent quality `q`; good reviews
/// draw topic words from the lower 60% of the vocabulary, bad ones from the
/// upper 60%. With `f` the share of good reviews among the `LABEL_RADIUS`
/// reviews on each side, the label is helpful with probability
/// `sigmoid(s * ((1 - rho) * (2q - 1) + rho * (2f - 1)))`.
pub fn generate_synthetic_corpus(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v = cfg.vocab_size;
    let good_end = v * 3 / 5;
    let bad_start = v * 2 / 5;
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");

    let mut records = Vec::with_capacity(cfg.items * cfg.reviews_per_item);
    let mut quality = Vec::with_capacity(records.capacity());
    for item in 0..cfg.items {
        let item_id = format!("item{item:03}");
        let item_name = format!("acme{item:03}");
        let n = cfg.reviews_per_item;
        // position 0 is the newest review
        let q: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let offset = rng.gen_range(0..365);
        for pos in 0..n {
            let lo = pos.saturating_sub(LABEL_RADIUS);
            let hi = (pos + LABEL_RADIUS).min(n - 1);
            let around: Vec<bool> = (lo..=hi).filter(|&j| j != pos).map(|j| q[j]).collect();
            let f = around.iter().filter(|&&g| g).count() as f64 / around.len() as f64;
            let own = if q[pos] { 1.0 } else { -1.0 };
            let signal = (1.0 - cfg.rho) * own + cfg.rho * (2.0 * f - 1.0);
            let helpful = rng.gen_bool(sigmoid(cfg.sharpness * signal));

            let len = rng.gen_range(cfg.review_len / 2..=cfg.review_len * 3 / 2);
            let mut tokens = Vec::with_capacity(len);
            for _ in 0..len {
                let u: f64 = rng.gen();
                let t = if u < 0.04 {
                    let list = if q[pos] { &POSITIVE_WORDS } else { &NEGATIVE_WORDS };
                    list.choose(&mut rng).expect("non-empty").to_string()
                } else if u < 0.06 {
                    rng.gen_range(1..100).to_string()
                } else if u < 0.08 {
                    item_name.clone()
                } else if q[pos] {
                    word(rng.gen_range(0..good_end))
                } else {
                    word(rng.gen_range(bad_start..v))
                };
                tokens.push(t);
            }
            let rating = if q[pos] { rng.gen_range(4..=5) } else { rng.gen_range(1..=3) };
            let votes = if helpful {
                HELPFUL_VOTE_THRESHOLD + rng.gen_range(0..6)
            } else {
                rng.gen_range(0..HELPFUL_VOTE_THRESHOLD)
            };
            let days = offset + (n - 1 - pos) as i64;
            records.push(CorpusRecord {
                item_id: item_id.clone(),
                review_id: format!("r{pos:04}"),
                date: start + Duration::days(days),
                rating,
                votes,
                text: tokens.join(" "),
                item_name: Some(item_name.clone()),
            });
            quality.push(q[pos]);
        }
    }

    // Word vectors cluster by topic: good-only words around +u, bad-only
    // words around -u, shared words around the origin.
    let dir: Vec<f64> = (0..cfg.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let mut vectors = Vec::with_capacity(v);
    for i in 0..v {
        let center = if i < bad_start {
            1.0
        } else if i >= good_end {
            -1.0
        } else {
            0.0
        };
        let vec: Vec<f64> = dir
            .iter()
            .map(|d| center * d / norm + rng.gen_range(-0.3..=0.3))
            .collect();
        vectors.push((word(i), vec));
    }
    Ok(SyntheticCorpus {
        records,
        vectors,
        quality,
    })
}
