//! Review ingestion and dataset construction.
//!
//! Raw reviews are grouped per item in display order (position 0 is the
//! newest review), filtered, split chronologically, normalized against a
//! training vocabulary and finally assembled into fixed-size
//! review/neighbor pairs.

mod io;
mod pipeline;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::context::NeighborScheme;
use crate::error::{NapError, Result};

pub use io::{
    read_corpus_jsonl, read_pairs_jsonl, read_prepared, read_vocabulary, write_corpus_jsonl,
    write_pairs_jsonl, write_prepared, write_vocabulary, CorpusRecord,
};
pub use pipeline::{assemble_dataset, prepare_corpus, PrepareConfig, PreparedCorpus, PreparedItem};

pub const PAD: &str = "<PAD>";
pub const UNK: &str = "<UNK>";
pub const NUM: &str = "<NUM>";
pub const ORG: &str = "<ORG>";

/// Specials occupy the first vocabulary slots, `<PAD>` at index 0.
pub const SPECIAL_TOKENS: [&str; 4] = [PAD, UNK, NUM, ORG];

pub const DEFAULT_MAX_TERMS: usize = 30_000;
pub const HELPFUL_VOTE_THRESHOLD: u32 = 2;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub item_id: String,
    pub review_id: String,
    pub position: usize,
    pub date: NaiveDate,
    pub star_rating: u8,
    pub helpful_votes: u32,
    pub raw_text: String,
    #[serde(default)]
    pub tokens: Vec<String>,
}

/// Reviews of one item in display order (newest first).
#[derive(Debug, Clone, PartialEq)]
pub struct ItemSequence {
    pub item_id: String,
    /// Lowercased tokens of the item's name, used for `<ORG>` substitution.
    pub name_tokens: HashSet<String>,
    pub reviews: Vec<Review>,
}

impl ItemSequence {
    pub fn new(item_id: impl Into<String>, mut reviews: Vec<Review>) -> Self {
        let item_id = item_id.into();
        let name_tokens = name_tokens(&item_id);
        // stable: equal dates keep their input order
        reviews.sort_by_key(|r| std::cmp::Reverse(r.date));
        for (i, r) in reviews.iter_mut().enumerate() {
            r.position = i;
        }
        Self {
            item_id,
            name_tokens,
            reviews,
        }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name_tokens.extend(name_tokens(name));
        self
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    fn renumber(&mut self) {
        for (i, r) in self.reviews.iter_mut().enumerate() {
            r.position = i;
        }
    }
}

fn name_tokens(name: &str) -> HashSet<String> {
    name.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum HelpfulnessLabel {
    Unhelpful = 0,
    Helpful = 1,
}

impl HelpfulnessLabel {
    pub fn as_f64(self) -> f64 {
        self as u8 as f64
    }

    pub fn is_helpful(self) -> bool {
        self == HelpfulnessLabel::Helpful
    }
}

impl From<HelpfulnessLabel> for u8 {
    fn from(l: HelpfulnessLabel) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for HelpfulnessLabel {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(HelpfulnessLabel::Unhelpful),
            1 => Ok(HelpfulnessLabel::Helpful),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Validation,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Validation, Partition::Test];

    pub fn name(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "val",
            Partition::Test => "test",
        }
    }
}

/// Token-to-index mapping. Line `i` of the vocabulary file is index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(NapError::data(format!("duplicate vocabulary token {t:?}")));
            }
        }
        for s in SPECIAL_TOKENS {
            if !index.contains_key(s) {
                return Err(NapError::data(format!("vocabulary lacks special token {s}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, idx: u32) -> Option<&str> {
        self.tokens.get(idx as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn pad_index(&self) -> u32 {
        self.index[PAD]
    }

    pub fn is_special(token: &str) -> bool {
        SPECIAL_TOKENS.contains(&token)
    }

    /// Map normalized tokens to indices.
    pub fn encode(&self, tokens: &[String]) -> Result<Vec<u32>> {
        tokens
            .iter()
            .map(|t| {
                self.index_of(t)
                    .ok_or_else(|| NapError::data(format!("token outside vocabulary: {t:?}")))
            })
            .collect()
    }
}

/// A preprocessed review: vocabulary indices plus metadata and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedReview {
    pub review_id: String,
    pub item_id: String,
    pub position: usize,
    pub date: NaiveDate,
    pub rating: u8,
    pub votes: u32,
    pub label: HelpfulnessLabel,
    pub tokens: Vec<u32>,
    /// Contextual baseline features computed over the review's item.
    #[serde(default)]
    pub features: BTreeMap<String, f64>,
}

/// A target review with exactly `K` neighbors in position order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPair {
    pub id: String,
    pub item_id: String,
    pub scheme: NeighborScheme,
    pub label: HelpfulnessLabel,
    pub target: EncodedReview,
    pub neighbors: Vec<EncodedReview>,
}

impl ContextPair {
    pub fn k(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<ContextPair>,
    pub validation: Vec<ContextPair>,
    pub test: Vec<ContextPair>,
}

impl DatasetSplit {
    pub fn partition(&self, p: Partition) -> &[ContextPair] {
        match p {
            Partition::Train => &self.train,
            Partition::Validation => &self.validation,
            Partition::Test => &self.test,
        }
    }

    pub fn partition_mut(&mut self, p: Partition) -> &mut Vec<ContextPair> {
        match p {
            Partition::Train => &mut self.train,
            Partition::Validation => &mut self.validation,
            Partition::Test => &mut self.test,
        }
    }
}

fn word_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{L}\p{N}]+(?:['.,][\p{L}\p{N}]+)*").unwrap())
}

/// Lowercase, split into words and drop the articles `a`, `an`, `the`.
pub fn tokenize_review(raw_text: &str) -> Vec<String> {
    let lower = raw_text.to_lowercase();
    word_regex()
        .find_iter(&lower)
        .map(|m| m.as_str())
        .filter(|w| !ARTICLES.contains(w))
        .map(str::to_owned)
        .collect()
}

pub fn is_numeric_token(token: &str) -> bool {
    let mut saw_digit = false;
    for c in token.chars() {
        match c {
            '0'..='9' => saw_digit = true,
            '.' | ',' => {}
            _ => return false,
        }
    }
    saw_digit
}

/// Keep the `max_terms` most frequent training tokens (ties broken
/// lexicographically) and prepend the special tokens.
///
/// Numeric tokens and tokens that are already specials are not counted.
pub fn build_vocabulary<'a, I>(training_reviews: I, max_terms: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [String]>,
{
    if max_terms == 0 {
        return Err(NapError::config("max_terms must be at least 1"));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut n_reviews = 0usize;
    for tokens in training_reviews {
        n_reviews += 1;
        for t in tokens {
            if Vocabulary::is_special(t) || is_numeric_token(t) {
                continue;
            }
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if n_reviews == 0 {
        return Err(NapError::data("empty corpus"));
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_terms);

    let tokens = SPECIAL_TOKENS
        .iter()
        .map(|s| s.to_string())
        .chain(ranked.into_iter().map(|(t, _)| t.to_owned()))
        .collect();
    Vocabulary::from_tokens(tokens)
}

/// Substitute `<NUM>`, then `<ORG>`, then `<UNK>`.
pub fn normalize_tokens(
    tokens: &[String],
    vocabulary: &Vocabulary,
    item_names: &HashSet<String>,
) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            if is_numeric_token(t) {
                NUM.to_owned()
            } else if item_names.contains(&t.to_lowercase()) {
                ORG.to_owned()
            } else if vocabulary.contains(t) {
                t.clone()
            } else {
                UNK.to_owned()
            }
        })
        .collect()
}

pub fn label_votes(helpful_votes: u32) -> HelpfulnessLabel {
    if helpful_votes >= HELPFUL_VOTE_THRESHOLD {
        HelpfulnessLabel::Helpful
    } else {
        HelpfulnessLabel::Unhelpful
    }
}

pub fn label_review(review: &Review) -> HelpfulnessLabel {
    label_votes(review.helpful_votes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_reviews: usize,
    /// A month before `early_cutoff` with fewer reviews than this is dropped.
    pub min_month_reviews: usize,
    pub early_cutoff: Option<NaiveDate>,
    /// Reviews posted after this day are dropped.
    pub late_cutoff: Option<NaiveDate>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_reviews: 100,
            min_month_reviews: 15,
            early_cutoff: None,
            late_cutoff: None,
        }
    }
}

/// Drop recent reviews, sparse early months, then items that are too small.
pub fn filter_items(corpus: Vec<ItemSequence>, cfg: &FilterConfig) -> Vec<ItemSequence> {
    corpus
        .into_iter()
        .filter_map(|mut item| {
            if let Some(late) = cfg.late_cutoff {
                item.reviews.retain(|r| r.date <= late);
            }
            if let Some(early) = cfg.early_cutoff {
                let mut per_month: HashMap<(i32, u32), usize> = HashMap::new();
                for r in &item.reviews {
                    *per_month.entry((r.date.year(), r.date.month())).or_default() += 1;
                }
                item.reviews.retain(|r| {
                    r.date >= early
                        || per_month[&(r.date.year(), r.date.month())] >= cfg.min_month_reviews
                });
            }
            item.renumber();
            (item.len() >= cfg.min_reviews).then_some(item)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    /// Partition sizes for `n` reviews: floors for validation and test,
    /// the remainder goes to train.
    pub fn counts(&self, n: usize) -> Result<(usize, usize, usize)> {
        let sum = self.train + self.validation + self.test;
        if (sum - 1.0).abs() > 1e-9 || self.train < 0.0 || self.validation < 0.0 || self.test < 0.0
        {
            return Err(NapError::config(format!(
                "split fractions must be non-negative and sum to 1, got {sum}"
            )));
        }
        // small epsilon so that e.g. 0.1 * 10 floors to 1
        let n_val = (self.validation * n as f64 + 1e-9).floor() as usize;
        let n_test = (self.test * n as f64 + 1e-9).floor() as usize;
        if n < 10 || n_val == 0 || n_test == 0 {
            return Err(NapError::data(format!(
                "item too small to split ({n} reviews)"
            )));
        }
        Ok((n - n_val - n_test, n_val, n_test))
    }
}

/// Split one item chronologically. Each returned partition keeps display
/// order; train holds the oldest reviews and test the newest.
pub fn split_chronological(
    item: &ItemSequence,
    fractions: SplitFractions,
) -> Result<(Vec<Review>, Vec<Review>, Vec<Review>)> {
    let (_, n_val, n_test) = fractions.counts(item.len()).map_err(|e| match e {
        NapError::Data(msg) => NapError::data(format!("item {}: {msg}", item.item_id)),
        other => other,
    })?;
    let test = item.reviews[..n_test].to_vec();
    let val = item.reviews[n_test..n_test + n_val].to_vec();
    let train = item.reviews[n_test + n_val..].to_vec();
    Ok((train, val, test))
}

/// Neighbor windows over a partition of length `len`: pairs of
/// (target index, neighbor indices ascending). Targets without a full
/// window are skipped.
pub fn context_windows(
    len: usize,
    scheme: NeighborScheme,
    k: usize,
) -> Result<Vec<(usize, Vec<usize>)>> {
    scheme.validate_k(k)?;
    let mut out = Vec::new();
    for i in 0..len {
        let window: Option<Vec<usize>> = match scheme {
            NeighborScheme::Preceding => (i >= k).then(|| (i - k..i).collect()),
            NeighborScheme::Following => (i + k < len).then(|| (i + 1..=i + k).collect()),
            NeighborScheme::Surrounding => {
                let half = k / 2;
                (i >= half && i + half < len)
                    .then(|| (i - half..i).chain(i + 1..=i + half).collect())
            }
        };
        if let Some(w) = window {
            out.push((i, w));
        }
    }
    Ok(out)
}

/// Build review/neighbor pairs for one item partition.
pub fn assemble_contexts(
    reviews: &[EncodedReview],
    scheme: NeighborScheme,
    k: usize,
) -> Result<Vec<ContextPair>> {
    Ok(context_windows(reviews.len(), scheme, k)?
        .into_iter()
        .map(|(i, neighbors)| {
            let target = reviews[i].clone();
            ContextPair {
                id: format!("{}/{}", target.item_id, target.review_id),
                item_id: target.item_id.clone(),
                scheme,
                label: target.label,
                neighbors: neighbors.into_iter().map(|j| reviews[j].clone()).collect(),
                target,
            }
        })
        .collect())
}

/// Downsample the majority class without replacement. The kept pairs
/// retain their original relative order.
pub fn balance_classes<R: Rng + ?Sized>(
    pairs: Vec<ContextPair>,
    rng: &mut R,
) -> Result<Vec<ContextPair>> {
    let (helpful, unhelpful): (Vec<usize>, Vec<usize>) =
        (0..pairs.len()).partition(|&i| pairs[i].label.is_helpful());
    if helpful.is_empty() || unhelpful.is_empty() {
        return Err(NapError::data("degenerate class distribution"));
    }
    let target = helpful.len().min(unhelpful.len());
    let mut keep = vec![false; pairs.len()];
    for class in [&helpful, &unhelpful] {
        if class.len() == target {
            class.iter().for_each(|&i| keep[i] = true);
        } else {
            for j in rand::seq::index::sample(rng, class.len(), target).into_iter() {
                keep[class[j]] = true;
            }
        }
    }
    Ok(pairs
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    fn review(item: &str, id: usize, date: NaiveDate, votes: u32) -> Review {
        Review {
            item_id: item.into(),
            review_id: format!("r{id}"),
            position: 0,
            date,
            star_rating: 3,
            helpful_votes: votes,
            raw_text: String::new(),
            tokens: vec![],
        }
    }

    fn day(n: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + chrono::Duration::days(n)
    }

    fn encoded(i: usize, label: HelpfulnessLabel) -> EncodedReview {
        EncodedReview {
            review_id: format!("r{i}"),
            item_id: "item".into(),
            position: i,
            date: day(100 - i as i64),
            rating: 5,
            votes: label as u32 * 3,
            label,
            tokens: vec![4],
            features: BTreeMap::new(),
        }
    }

    #[test]
    fn tokenize_drops_articles() {
        assert_eq!(
            tokenize_review("The Headphone is Cool"),
            toks(&["headphone", "is", "cool"])
        );
        assert!(tokenize_review("").is_empty());
        assert!(tokenize_review("A a THE an").is_empty());
        assert_eq!(
            tokenize_review("I paid $200.50, it's fine!"),
            toks(&["i", "paid", "200.50", "it's", "fine"])
        );
    }

    #[test]
    fn vocabulary_frequency_and_ties() {
        let corpus = [toks(&["x", "x", "x", "y", "y", "z"])];
        let v = build_vocabulary(corpus.iter().map(Vec::as_slice), 2).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.contains("x") && v.contains("y") && !v.contains("z"));
        assert_eq!(v.index_of(PAD), Some(0));

        let corpus = [toks(&["y", "x", "y", "x"])];
        let v = build_vocabulary(corpus.iter().map(Vec::as_slice), 1).unwrap();
        assert!(v.contains("x") && !v.contains("y"));
    }

    #[test]
    fn vocabulary_empty_corpus_is_error() {
        let corpus: Vec<Vec<String>> = vec![];
        let err = build_vocabulary(corpus.iter().map(Vec::as_slice), 10).unwrap_err();
        assert!(err.to_string().contains("empty corpus"));
    }

    #[test]
    fn normalize_substitution_order() {
        let corpus = [toks(&["paid", "to", "acme"])];
        let v = build_vocabulary(corpus.iter().map(Vec::as_slice), 10).unwrap();
        let names: HashSet<String> = ["acme".to_string()].into();
        assert_eq!(
            normalize_tokens(&toks(&["paid", "200", "to", "acme"]), &v, &names),
            toks(&["paid", NUM, "to", ORG])
        );
        assert_eq!(
            normalize_tokens(&toks(&["paid", "to"]), &v, &names),
            toks(&["paid", "to"])
        );
        assert_eq!(
            normalize_tokens(&toks(&["zzzunseen"]), &v, &names),
            toks(&[UNK])
        );
    }

    #[test]
    fn labels_at_threshold() {
        assert_eq!(label_votes(2), HelpfulnessLabel::Helpful);
        assert_eq!(label_votes(1), HelpfulnessLabel::Unhelpful);
        assert_eq!(label_votes(0), HelpfulnessLabel::Unhelpful);
    }

    #[test]
    fn filter_min_reviews_boundary() {
        let mk = |name: &str, n: usize| {
            ItemSequence::new(name, (0..n).map(|i| review(name, i, day(i as i64), 0)).collect())
        };
        let out = filter_items(vec![mk("small", 99), mk("big", 100)], &FilterConfig::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].item_id, "big");
        assert!(filter_items(vec![], &FilterConfig::default()).is_empty());
    }

    #[test]
    fn filter_cutoffs() {
        // 3 reviews in January 2018 (sparse), 20 in March, 2 after the late cutoff
        let mut reviews = vec![];
        for i in 0..3 {
            reviews.push(review("a", i, day(i as i64), 0));
        }
        for i in 0..20 {
            reviews.push(review("a", 100 + i, day(60 + i as i64 % 20), 0));
        }
        for i in 0..2 {
            reviews.push(review("a", 200 + i, day(400), 0));
        }
        let cfg = FilterConfig {
            min_reviews: 1,
            min_month_reviews: 15,
            early_cutoff: Some(day(200)),
            late_cutoff: Some(day(300)),
        };
        let out = filter_items(vec![ItemSequence::new("a", reviews)], &cfg);
        assert_eq!(out[0].len(), 20);
        assert!(out[0].reviews.iter().enumerate().all(|(i, r)| r.position == i));
    }

    #[test]
    fn split_counts() {
        let f = SplitFractions::default();
        assert_eq!(f.counts(100).unwrap(), (80, 10, 10));
        assert_eq!(f.counts(10).unwrap(), (8, 1, 1));
        assert_eq!(f.counts(103).unwrap(), (83, 10, 10));
        assert!(f.counts(9).unwrap_err().to_string().contains("too small"));
    }

    #[test]
    fn split_is_chronological() {
        let item = ItemSequence::new(
            "a",
            (0..20).map(|i| review("a", i, day(i as i64), 0)).collect(),
        );
        let (train, val, test) = split_chronological(&item, SplitFractions::default()).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (16, 2, 2));
        let max_train = train.iter().map(|r| r.date).max().unwrap();
        let min_val = val.iter().map(|r| r.date).min().unwrap();
        let max_val = val.iter().map(|r| r.date).max().unwrap();
        let min_test = test.iter().map(|r| r.date).min().unwrap();
        assert!(max_train <= min_val && max_val <= min_test);
    }

    #[test]
    fn surrounding_window_figure_example() {
        let reviews: Vec<_> = (0..5).map(|i| encoded(i, HelpfulnessLabel::Helpful)).collect();
        let pairs = assemble_contexts(&reviews, NeighborScheme::Surrounding, 4).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].target.review_id, "r2");
        let ids: Vec<_> = pairs[0].neighbors.iter().map(|r| r.review_id.as_str()).collect();
        assert_eq!(ids, ["r0", "r1", "r3", "r4"]);
    }

    #[test]
    fn preceding_and_following_windows() {
        assert_eq!(
            context_windows(3, NeighborScheme::Preceding, 2).unwrap(),
            vec![(2, vec![0, 1])]
        );
        assert_eq!(
            context_windows(2, NeighborScheme::Preceding, 1).unwrap(),
            vec![(1, vec![0])]
        );
        assert_eq!(
            context_windows(3, NeighborScheme::Following, 2).unwrap(),
            vec![(0, vec![1, 2])]
        );
        assert!(context_windows(2, NeighborScheme::Following, 2).unwrap().is_empty());
        assert!(context_windows(5, NeighborScheme::Surrounding, 3).is_err());
        assert!(context_windows(5, NeighborScheme::Preceding, 0).is_err());
    }

    #[test]
    fn balance_downsamples_majority() {
        let mut pairs = vec![];
        let reviews: Vec<_> = (0..14)
            .map(|i| {
                encoded(
                    i,
                    if i < 10 {
                        HelpfulnessLabel::Helpful
                    } else {
                        HelpfulnessLabel::Unhelpful
                    },
                )
            })
            .collect();
        for r in &reviews {
            pairs.push(ContextPair {
                id: r.review_id.clone(),
                item_id: "item".into(),
                scheme: NeighborScheme::Preceding,
                label: r.label,
                target: r.clone(),
                neighbors: vec![],
            });
        }
        let a = balance_classes(pairs.clone(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = balance_classes(pairs.clone(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|p| p.label.is_helpful()).count(), 4);
        assert_eq!(a.len(), 8);

        let balanced: Vec<_> = pairs[6..].to_vec();
        let c = balance_classes(balanced.clone(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(c, balanced);

        let err = balance_classes(pairs[..10].to_vec(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(err.unwrap_err().to_string().contains("degenerate"));
    }
}
