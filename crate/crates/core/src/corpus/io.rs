use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::pipeline::{PreparedCorpus, PreparedItem};
use super::{tokenize_review, ContextPair, EncodedReview, ItemSequence, Partition, Review, Vocabulary};
use crate::error::{NapError, Result};

/// One line of the input corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub item_id: String,
    pub review_id: String,
    pub date: NaiveDate,
    pub rating: u8,
    pub votes: u32,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_name: Option<String>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| NapError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| NapError::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> NapError {
    NapError::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

/// Read a review corpus and group it by item. Items keep the order in
/// which they first appear; reviews are sorted newest first and tokenized.
pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<ItemSequence>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Option<String>, Vec<Review>)> = HashMap::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| NapError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        if !(1..=5).contains(&rec.rating) {
            return Err(parse_err(
                path,
                i + 1,
                format!("rating must be in 1..=5, got {}", rec.rating),
            ));
        }
        let entry = groups.entry(rec.item_id.clone()).or_insert_with(|| {
            order.push(rec.item_id.clone());
            (None, Vec::new())
        });
        if entry.0.is_none() {
            entry.0 = rec.item_name.clone();
        }
        entry.1.push(Review {
            tokens: tokenize_review(&rec.text),
            item_id: rec.item_id,
            review_id: rec.review_id,
            position: 0,
            date: rec.date,
            star_rating: rec.rating,
            helpful_votes: rec.votes,
            raw_text: rec.text,
        });
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let (name, reviews) = groups.remove(&id).unwrap();
            let item = ItemSequence::new(id, reviews);
            match name {
                Some(n) => item.with_name(&n),
                None => item,
            }
        })
        .collect())
}

pub fn write_corpus_jsonl(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| NapError::io(path, e))?;
    }
    w.flush().map_err(|e| NapError::io(path, e))
}

pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut w = create(path)?;
    for t in vocab.tokens() {
        writeln!(w, "{t}").map_err(|e| NapError::io(path, e))?;
    }
    w.flush().map_err(|e| NapError::io(path, e))
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let tokens = open(path)?
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| NapError::io(path, e))?;
    Vocabulary::from_tokens(tokens)
}

pub fn write_pairs_jsonl(path: &Path, pairs: &[ContextPair]) -> Result<()> {
    let mut w = create(path)?;
    for p in pairs {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n").map_err(|e| NapError::io(path, e))?;
    }
    w.flush().map_err(|e| NapError::io(path, e))
}

pub fn read_pairs_jsonl(path: &Path) -> Result<Vec<ContextPair>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| NapError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| parse_err(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct PreparedLine {
    partition: Partition,
    #[serde(flatten)]
    review: EncodedReview,
}

/// Write `vocab.txt` and `reviews.jsonl` (partition-tagged, item and
/// display order) into `dir`.
pub fn write_prepared(dir: &Path, corpus: &PreparedCorpus) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| NapError::io(dir, e))?;
    write_vocabulary(&dir.join("vocab.txt"), &corpus.vocab)?;
    let path = dir.join("reviews.jsonl");
    let mut w = create(&path)?;
    for item in &corpus.items {
        for p in Partition::ALL {
            for r in item.partition(p) {
                serde_json::to_writer(
                    &mut w,
                    &PreparedLine {
                        partition: p,
                        review: r.clone(),
                    },
                )?;
                w.write_all(b"\n").map_err(|e| NapError::io(&path, e))?;
            }
        }
    }
    w.flush().map_err(|e| NapError::io(&path, e))
}

pub fn read_prepared(dir: &Path) -> Result<PreparedCorpus> {
    let vocab = read_vocabulary(&dir.join("vocab.txt"))?;
    let path = dir.join("reviews.jsonl");
    let mut items: Vec<PreparedItem> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in open(&path)?.lines().enumerate() {
        let line = line.map_err(|e| NapError::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PreparedLine =
            serde_json::from_str(&line).map_err(|e| parse_err(&path, i + 1, e.to_string()))?;
        if let Some(&bad) = rec.review.tokens.iter().find(|&&t| t as usize >= vocab.len()) {
            return Err(parse_err(&path, i + 1, format!("token index {bad} outside vocabulary")));
        }
        let slot = *index.entry(rec.review.item_id.clone()).or_insert_with(|| {
            items.push(PreparedItem::new(rec.review.item_id.clone()));
            items.len() - 1
        });
        items[slot].partition_mut(rec.partition).push(rec.review);
    }
    Ok(PreparedCorpus { vocab, items })
}
