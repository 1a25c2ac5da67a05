use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    assemble_contexts, balance_classes, build_vocabulary, filter_items, is_numeric_token,
    label_review, normalize_tokens, split_chronological, DatasetSplit, EncodedReview,
    FilterConfig, ItemSequence, Partition, Review, SplitFractions, Vocabulary, DEFAULT_MAX_TERMS,
    NUM, ORG,
};
use crate::baselines::{item_features, SentimentLexicon};
use crate::context::NeighborScheme;
use crate::error::{NapError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareConfig {
    pub filter: FilterConfig,
    pub fractions: SplitFractions,
    pub max_terms: usize,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            fractions: SplitFractions::default(),
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedItem {
    pub item_id: String,
    pub train: Vec<EncodedReview>,
    pub validation: Vec<EncodedReview>,
    pub test: Vec<EncodedReview>,
}

impl PreparedItem {
    pub fn new(item_id: String) -> Self {
        Self {
            item_id,
            train: vec![],
            validation: vec![],
            test: vec![],
        }
    }

    pub fn partition(&self, p: Partition) -> &[EncodedReview] {
        match p {
            Partition::Train => &self.train,
            Partition::Validation => &self.validation,
            Partition::Test => &self.test,
        }
    }

    pub fn partition_mut(&mut self, p: Partition) -> &mut Vec<EncodedReview> {
        match p {
            Partition::Train => &mut self.train,
            Partition::Validation => &mut self.validation,
            Partition::Test => &mut self.test,
        }
    }
}

/// Labeled, split and vocabulary-encoded reviews, before context assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCorpus {
    pub vocab: Vocabulary,
    pub items: Vec<PreparedItem>,
}

impl PreparedCorpus {
    pub fn reviews(&self, p: Partition) -> impl Iterator<Item = &EncodedReview> {
        self.items.iter().flat_map(move |i| i.partition(p).iter())
    }
}

fn substitute_num_org(tokens: &[String], names: &HashSet<String>) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            if is_numeric_token(t) {
                NUM.to_owned()
            } else if names.contains(t) {
                ORG.to_owned()
            } else {
                t.clone()
            }
        })
        .collect()
}

/// Run the preprocessing pipeline up to (but excluding) context assembly.
///
/// Reviews whose text yields no tokens are dropped first since they have
/// no convolution window.
pub fn prepare_corpus(
    items: Vec<ItemSequence>,
    cfg: &PrepareConfig,
    lexicon: &SentimentLexicon,
) -> Result<PreparedCorpus> {
    let items: Vec<ItemSequence> = items
        .into_iter()
        .map(|mut item| {
            item.reviews.retain(|r| !r.tokens.is_empty());
            item.renumber();
            item
        })
        .collect();
    let items = filter_items(items, &cfg.filter);
    if items.is_empty() {
        return Err(NapError::data("no items left after filtering"));
    }

    struct Staged<'a> {
        item: &'a ItemSequence,
        parts: [Vec<Review>; 3],
        features: Vec<std::collections::BTreeMap<String, f64>>,
    }

    let mut staged = Vec::with_capacity(items.len());
    for item in &items {
        let (train, val, test) = split_chronological(item, cfg.fractions)?;
        staged.push(Staged {
            item,
            parts: [train, val, test],
            features: item_features(item, lexicon),
        });
    }

    let train_tokens: Vec<Vec<String>> = staged
        .iter()
        .flat_map(|s| {
            s.parts[0]
                .iter()
                .map(|r| substitute_num_org(&r.tokens, &s.item.name_tokens))
        })
        .collect();
    let vocab = build_vocabulary(train_tokens.iter().map(Vec::as_slice), cfg.max_terms)?;

    let mut prepared = Vec::with_capacity(staged.len());
    for s in staged {
        let mut out = PreparedItem::new(s.item.item_id.clone());
        for (p, reviews) in Partition::ALL.into_iter().zip(&s.parts) {
            for r in reviews {
                let normalized = normalize_tokens(&r.tokens, &vocab, &s.item.name_tokens);
                out.partition_mut(p).push(EncodedReview {
                    review_id: r.review_id.clone(),
                    item_id: r.item_id.clone(),
                    position: r.position,
                    date: r.date,
                    rating: r.star_rating,
                    votes: r.helpful_votes,
                    label: label_review(r),
                    tokens: vocab.encode(&normalized)?,
                    features: s.features[r.position].clone(),
                });
            }
        }
        prepared.push(out);
    }
    Ok(PreparedCorpus {
        vocab,
        items: prepared,
    })
}

/// Assemble neighbor contexts within each item partition and balance each
/// partition's classes. Deterministic in `seed`.
pub fn assemble_dataset(
    corpus: &PreparedCorpus,
    scheme: NeighborScheme,
    k: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = DatasetSplit::default();
    for p in Partition::ALL {
        let mut pairs = Vec::new();
        for item in &corpus.items {
            pairs.extend(assemble_contexts(item.partition(p), scheme, k)?);
        }
        if pairs.is_empty() {
            return Err(NapError::data(format!(
                "no {} context pairs for {} K={k}",
                p.name(),
                scheme.code()
            )));
        }
        *split.partition_mut(p) = balance_classes(pairs, &mut rng).map_err(|e| match e {
            NapError::Data(msg) => NapError::data(format!("{} partition: {msg}", p.name())),
            other => other,
        })?;
    }
    Ok(split)
}
