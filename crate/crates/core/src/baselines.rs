//! Contextual scalar baselines: order, conformity, polarity and entropy
//! features computed per item, plus z-score standardization and fusion
//! with a review embedding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedReview, ItemSequence, Review};
use crate::error::{NapError, Result};
use crate::model::predict_probability;

/// Additive smoothing applied before normalizing TFIDF vectors.
pub const KL_SMOOTHING: f64 = 1e-9;
/// `p_r` above this is a positive review, below its negation a negative one.
pub const POLARITY_THRESHOLD: f64 = 1.0 / 3.0;

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureKind {
    OrdDate,
    OrdRating,
    OrdVotes,
    Conformity,
    Polarity,
    Entropy,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::OrdDate,
        FeatureKind::OrdRating,
        FeatureKind::OrdVotes,
        FeatureKind::Conformity,
        FeatureKind::Polarity,
        FeatureKind::Entropy,
    ];

    /// Key in [`EncodedReview::features`] and in feature dumps.
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::OrdDate => "ord_d",
            FeatureKind::OrdRating => "ord_r",
            FeatureKind::OrdVotes => "ord_v",
            FeatureKind::Conformity => "con",
            FeatureKind::Polarity => "pol",
            FeatureKind::Entropy => "ent",
        }
    }

    /// Suffix of the fused variant code, as in `I+ORD_D`.
    pub fn code(self) -> &'static str {
        match self {
            FeatureKind::OrdDate => "ORD_D",
            FeatureKind::OrdRating => "ORD_R",
            FeatureKind::OrdVotes => "ORD_V",
            FeatureKind::Conformity => "CON",
            FeatureKind::Polarity => "POL",
            FeatureKind::Entropy => "ENT",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for FeatureKind {
    type Err = NapError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| NapError::config(format!("unknown baseline feature {s:?}")))
    }
}

impl From<FeatureKind> for String {
    fn from(k: FeatureKind) -> String {
        k.code().to_owned()
    }
}

impl TryFrom<String> for FeatureKind {
    type Error = NapError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Word polarity list. Positive and negative sets are disjoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl SentimentLexicon {
    /// Parse `word<TAB>positive|negative` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = SentimentLexicon::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, polarity) = line
                .split_once('\t')
                .ok_or_else(|| NapError::data(format!("lexicon line {}: expected two columns", i + 1)))?;
            let word = word.trim().to_lowercase();
            let (own, other) = match polarity.trim() {
                "positive" => (&mut lex.positive, &lex.negative),
                "negative" => (&mut lex.negative, &lex.positive),
                p => {
                    return Err(NapError::data(format!(
                        "lexicon line {}: unknown polarity {p:?}",
                        i + 1
                    )))
                }
            };
            if other.contains(&word) {
                return Err(NapError::data(format!(
                    "lexicon line {}: {word:?} is both positive and negative",
                    i + 1
                )));
            }
            own.insert(word);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| NapError::io(path, e))?;
        Self::parse(&text)
    }

    /// The small lexicon bundled with the crate.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is well formed")
    }

    pub fn from_words<I, J, S, T>(positive: I, negative: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let positive: HashSet<String> = positive.into_iter().map(Into::into).collect();
        let negative: HashSet<String> = negative.into_iter().map(Into::into).collect();
        if let Some(w) = positive.intersection(&negative).next() {
            return Err(NapError::data(format!("{w:?} is both positive and negative")));
        }
        Ok(Self { positive, negative })
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `[groups strictly before + 1]^-1` where reviews are sorted by `key` in
/// descending order and equal keys form one group.
pub fn order_values<K: Ord>(keys: &[K]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[b].cmp(&keys[a]));
    let mut out = vec![0.0; keys.len()];
    let mut before = 0usize;
    let mut start = 0usize;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && keys[idx[end]] == keys[idx[start]] {
            end += 1;
        }
        let value = 1.0 / (before + 1) as f64;
        for &i in &idx[start..end] {
            out[i] = value;
        }
        before += end - start;
        start = end;
    }
    out
}

/// Order feature of every review (indexed like `reviews`): by date (newest
/// first), rating (highest first) or votes (most first).
pub fn order_feature(reviews: &[Review], kind: FeatureKind) -> Result<Vec<f64>> {
    Ok(match kind {
        FeatureKind::OrdDate => order_values(&reviews.iter().map(|r| r.date).collect::<Vec<_>>()),
        FeatureKind::OrdRating => {
            order_values(&reviews.iter().map(|r| r.star_rating).collect::<Vec<_>>())
        }
        FeatureKind::OrdVotes => {
            order_values(&reviews.iter().map(|r| r.helpful_votes).collect::<Vec<_>>())
        }
        other => return Err(NapError::config(format!("{other} is not an order feature"))),
    })
}

/// KL divergence of each review's smoothed TFIDF distribution from the
/// item's mean distribution. A review without tokens smooths to uniform.
pub fn conformity_feature<S: AsRef<str>>(docs: &[Vec<S>]) -> Vec<f64> {
    let n = docs.len();
    if n == 0 {
        return vec![];
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut counts: Vec<HashMap<usize, f64>> = Vec::with_capacity(n);
    for doc in docs {
        let mut tf = HashMap::new();
        for t in doc {
            let next = index.len();
            let w = *index.entry(t.as_ref()).or_insert(next);
            *tf.entry(w).or_insert(0.0) += 1.0;
        }
        counts.push(tf);
    }
    let v = index.len();
    if v == 0 {
        return vec![0.0; n];
    }
    let mut df = vec![0usize; v];
    for tf in &counts {
        for &w in tf.keys() {
            df[w] += 1;
        }
    }
    let idf: Vec<f64> = df.iter().map(|&d| (n as f64 / d as f64).ln()).collect();

    let tfidf: Vec<Vec<f64>> = counts
        .iter()
        .map(|tf| {
            let mut u = vec![0.0; v];
            for (&w, &c) in tf {
                u[w] = c * idf[w];
            }
            u
        })
        .collect();
    let mut mean = vec![0.0; v];
    for u in &tfidf {
        for (m, x) in mean.iter_mut().zip(u) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let p_bar = smooth(&mean);
    tfidf
        .iter()
        .map(|u| {
            let p = smooth(u);
            p.iter()
                .zip(&p_bar)
                .map(|(&a, &b)| a * (a / b).ln())
                .sum::<f64>()
                .max(0.0)
        })
        .collect()
}

fn smooth(u: &[f64]) -> Vec<f64> {
    let total: f64 = u.iter().map(|x| x + KL_SMOOTHING).sum();
    u.iter().map(|x| (x + KL_SMOOTHING) / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolarityClass {
    Negative,
    Neutral,
    Positive,
}

/// `(pos - neg) / (pos + neg)`, or 0 without sentiment words.
pub fn polarity_score<S: AsRef<str>>(tokens: &[S], lexicon: &SentimentLexicon) -> f64 {
    let (mut pos, mut neg) = (0usize, 0usize);
    for t in tokens {
        if lexicon.is_positive(t.as_ref()) {
            pos += 1;
        } else if lexicon.is_negative(t.as_ref()) {
            neg += 1;
        }
    }
    if pos + neg == 0 {
        0.0
    } else {
        (pos as f64 - neg as f64) / (pos + neg) as f64
    }
}

pub fn polarity_class(score: f64) -> PolarityClass {
    if score > POLARITY_THRESHOLD {
        PolarityClass::Positive
    } else if score < -POLARITY_THRESHOLD {
        PolarityClass::Negative
    } else {
        PolarityClass::Neutral
    }
}

/// `|p_r - p_bar|` where `p_bar` averages the scores of the item's
/// majority polarity class (ties resolve to neutral).
pub fn polarity_feature<S: AsRef<str>>(docs: &[Vec<S>], lexicon: &SentimentLexicon) -> Vec<f64> {
    let scores: Vec<f64> = docs.iter().map(|d| polarity_score(d, lexicon)).collect();
    polarity_divergence(&scores)
}

/// [`polarity_feature`] on precomputed scores.
pub fn polarity_divergence(scores: &[f64]) -> Vec<f64> {
    let classes: Vec<PolarityClass> = scores.iter().map(|&s| polarity_class(s)).collect();
    let count = |c| classes.iter().filter(|&&x| x == c).count();
    let (neg, neu, pos) = (
        count(PolarityClass::Negative),
        count(PolarityClass::Neutral),
        count(PolarityClass::Positive),
    );
    let majority = if pos > neg && pos > neu {
        PolarityClass::Positive
    } else if neg > pos && neg > neu {
        PolarityClass::Negative
    } else {
        PolarityClass::Neutral
    };
    let members: Vec<f64> = scores
        .iter()
        .zip(&classes)
        .filter(|(_, &c)| c == majority)
        .map(|(&s, _)| s)
        .collect();
    // mean as an offset from the first member, so equal scores give
    // exactly that score back
    let p_bar = match members.first() {
        None => 0.0,
        Some(&first) => first + members.iter().map(|s| s - first).sum::<f64>() / members.len() as f64,
    };
    scores.iter().map(|s| (s - p_bar).abs()).collect()
}

/// Number of words each review adds to the item's vocabulary, with `docs`
/// in posting order (oldest first).
pub fn entropy_feature<S: AsRef<str>>(docs: &[Vec<S>]) -> Vec<f64> {
    let mut seen: HashSet<&str> = HashSet::new();
    docs.iter()
        .map(|d| {
            let before = seen.len();
            seen.extend(d.iter().map(AsRef::as_ref));
            (seen.len() - before) as f64
        })
        .collect()
}

/// All six features for every review of `item`, indexed by display position.
pub fn item_features(item: &ItemSequence, lexicon: &SentimentLexicon) -> Vec<BTreeMap<String, f64>> {
    let reviews = &item.reviews;
    let docs: Vec<&Vec<String>> = reviews.iter().map(|r| &r.tokens).collect();
    let owned: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();

    let mut posting: Vec<Vec<&str>> = owned.clone();
    posting.reverse();
    let mut ent = entropy_feature(&posting);
    ent.reverse();

    let columns: [(FeatureKind, Vec<f64>); 6] = [
        (FeatureKind::OrdDate, order_feature(reviews, FeatureKind::OrdDate).expect("order kind")),
        (FeatureKind::OrdRating, order_feature(reviews, FeatureKind::OrdRating).expect("order kind")),
        (FeatureKind::OrdVotes, order_feature(reviews, FeatureKind::OrdVotes).expect("order kind")),
        (FeatureKind::Conformity, conformity_feature(&owned)),
        (FeatureKind::Polarity, polarity_feature(&owned, lexicon)),
        (FeatureKind::Entropy, ent),
    ];
    let mut out = vec![BTreeMap::new(); reviews.len()];
    for (kind, values) in columns {
        for (pos, v) in values.into_iter().enumerate() {
            out[pos].insert(kind.name().to_owned(), v);
        }
    }
    out
}

fn feature_value(review: &EncodedReview, kind: FeatureKind) -> Result<f64> {
    review.features.get(kind.name()).copied().ok_or_else(|| {
        NapError::data(format!(
            "review {}/{} has no {} feature",
            review.item_id,
            review.review_id,
            kind.name()
        ))
    })
}

/// Training-set mean and population standard deviation per feature.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    stats: BTreeMap<String, (f64, f64)>,
}

impl Standardizer {
    pub fn fit<'a, I>(reviews: I, kinds: &[FeatureKind]) -> Result<Self>
    where
        I: IntoIterator<Item = &'a EncodedReview>,
    {
        let mut columns: Vec<Vec<f64>> = vec![vec![]; kinds.len()];
        for r in reviews {
            for (col, &k) in columns.iter_mut().zip(kinds) {
                col.push(feature_value(r, k)?);
            }
        }
        let mut stats = BTreeMap::new();
        for (col, k) in columns.iter().zip(kinds) {
            if col.is_empty() {
                return Err(NapError::data("cannot standardize over zero training reviews"));
            }
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            stats.insert(k.name().to_owned(), (mean, var.sqrt()));
        }
        Ok(Self { stats })
    }

    pub fn mean_std(&self, kind: FeatureKind) -> Option<(f64, f64)> {
        self.stats.get(kind.name()).copied()
    }

    /// z-scores; a constant training feature is only centered.
    pub fn standardize(&self, kind: FeatureKind, value: f64) -> Result<f64> {
        let (mean, std) = self.mean_std(kind).ok_or_else(|| {
            NapError::config(format!("missing training statistics for {}", kind.name()))
        })?;
        Ok(if std > 0.0 { (value - mean) / std } else { value - mean })
    }

    pub fn transform(&self, review: &EncodedReview, kinds: &[FeatureKind]) -> Result<Vec<f64>> {
        kinds
            .iter()
            .map(|&k| self.standardize(k, feature_value(review, k)?))
            .collect()
    }
}

/// Concatenate `h` with standardized features and apply one logistic unit
/// of width `m + f`.
pub fn fused_predict(h: &[f64], features: &[f64], weights: &[f64], bias: f64) -> Result<f64> {
    let input: Vec<f64> = h.iter().chain(features).copied().collect();
    predict_probability(&input, weights, bias)
}

/// Write `review_id,feature_name,value` rows, features in name order.
pub fn write_feature_csv<'a, I>(path: &Path, reviews: I) -> Result<()>
where
    I: IntoIterator<Item = &'a EncodedReview>,
{
    let mut out = String::from("review_id,feature_name,value\n");
    for r in reviews {
        for (name, v) in &r.features {
            out.push_str(&format!("{},{name},{v}\n", r.review_id));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| NapError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| NapError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn docs(words: &[&[&'static str]]) -> Vec<Vec<&'static str>> {
        words.iter().map(|d| d.to_vec()).collect()
    }

    #[test]
    fn order_examples() {
        let d1 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let d3 = NaiveDate::from_ymd_opt(2020, 1, 3).unwrap();
        assert_eq!(order_values(&[d3, d3, d1]), vec![1.0, 1.0, 1.0 / 3.0]);
        assert_eq!(order_values(&[d1, d1, d1]), vec![1.0; 3]);
        assert_eq!(order_values(&[5, 4, 3, 2]), vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        // ratings out of display order still rank by value
        assert_eq!(order_values(&[3u8, 5, 3]), vec![0.5, 1.0, 0.5]);
    }

    #[test]
    fn conformity_identical_and_disjoint() {
        let same = conformity_feature(&docs(&[&["x", "y"], &["x", "y"], &["x", "y"]]));
        assert!(same.iter().all(|&v| v.abs() < 1e-9));

        let disjoint = conformity_feature(&docs(&[&["a"], &["b"]]));
        assert_eq!(disjoint[0], disjoint[1]);
        assert!((disjoint[0] - 0.6931471497486636).abs() < 1e-12);
    }

    #[test]
    fn polarity_examples() {
        let lex = SentimentLexicon::from_words(["good"], ["bad"]).unwrap();
        let s = polarity_score(&["good", "good", "good", "bad"], &lex);
        assert_eq!(s, 0.5);
        assert_eq!(polarity_class(s), PolarityClass::Positive);
        assert_eq!(polarity_divergence(&[0.2, 0.2, 0.2]), vec![0.0; 3]);
        // one of each class: tie resolves to neutral, mean over {0} is 0
        assert_eq!(polarity_divergence(&[1.0, 0.0, -1.0]), vec![1.0, 0.0, 1.0]);
        assert!(SentimentLexicon::from_words(["x"], ["x"]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_feature(&docs(&[&["a", "b"], &["b", "c"]])), vec![2.0, 1.0]);
        assert_eq!(entropy_feature(&docs(&[&["a", "b"], &["a"]])), vec![2.0, 0.0]);
    }

    #[test]
    fn bundled_lexicon_loads() {
        let lex = SentimentLexicon::bundled();
        assert!(lex.is_positive("great"));
        assert!(lex.is_negative("terrible"));
        assert!(SentimentLexicon::parse("word\tneutral").is_err());
    }

    #[test]
    fn fused_with_zero_weights_is_bias() {
        let p = fused_predict(&[1.0, 2.0], &[], &[0.0, 0.0], 0.3).unwrap();
        assert_eq!(p, crate::model::sigmoid(0.3));
    }

    #[test]
    fn feature_codes_parse() {
        for k in FeatureKind::ALL {
            assert_eq!(k.code().parse::<FeatureKind>().unwrap(), k);
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
    }

    #[test]
    fn standardizer_requires_stats() {
        let st = Standardizer::default();
        assert!(st.standardize(FeatureKind::Entropy, 1.0).is_err());
    }
}
