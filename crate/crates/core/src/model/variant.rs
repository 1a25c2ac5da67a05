use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelConfig;
use crate::baselines::{FeatureKind, Standardizer};
use crate::context::{NeighborScheme, WeightingScheme};
use crate::corpus::{ContextPair, DatasetSplit, EncodedReview, HelpfulnessLabel, Partition};
use crate::error::{NapError, Result};

/// Model variant. `I` is independent prediction, `P`/`F`/`S` neighbor-only,
/// `I+P`/`I+F`/`I+S` neighbor-aware, `I+R` random reviews as context,
/// `I+N` uniform noise as context and `I+<feature>` a fused scalar baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Variant {
    Independent,
    NeighborOnly(NeighborScheme),
    Contextual(NeighborScheme),
    RandomNeighbors,
    Noise,
    Fused(FeatureKind),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Independent => f.write_str("I"),
            Variant::NeighborOnly(s) => f.write_str(s.code()),
            Variant::Contextual(s) => write!(f, "I+{}", s.code()),
            Variant::RandomNeighbors => f.write_str("I+R"),
            Variant::Noise => f.write_str("I+N"),
            Variant::Fused(k) => write!(f, "I+{}", k.code()),
        }
    }
}

impl FromStr for Variant {
    type Err = NapError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_uppercase();
        let v = match s.as_str() {
            "I" => Variant::Independent,
            "P" | "F" | "S" => Variant::NeighborOnly(s.parse()?),
            "I+P" | "I+F" | "I+S" => Variant::Contextual(s[2..].parse()?),
            "I+R" => Variant::RandomNeighbors,
            "I+N" => Variant::Noise,
            other => match other.strip_prefix("I+") {
                Some(code) => Variant::Fused(code.parse()?),
                None => return Err(NapError::config(format!("unknown variant {other:?}"))),
            },
        };
        Ok(v)
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Variant {
    type Error = NapError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Variant {
    /// Neighbor scheme implied by the variant, if any.
    pub fn neighbor_scheme(self) -> Option<NeighborScheme> {
        match self {
            Variant::NeighborOnly(s) | Variant::Contextual(s) => Some(s),
            _ => None,
        }
    }

    pub fn uses_neighbors(self) -> bool {
        matches!(
            self,
            Variant::NeighborOnly(_) | Variant::Contextual(_) | Variant::RandomNeighbors
        )
    }
}

/// What the context embedding is built from.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextSource {
    /// Token sequences of the `K` context reviews, in order.
    Neighbors(Vec<Vec<u32>>),
    /// A fixed context vector (`I+N`).
    Noise(Vec<f64>),
}

/// A training or evaluation sample in model-ready form.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub label: HelpfulnessLabel,
    pub target: Vec<u32>,
    pub context: ContextSource,
    /// Standardized scalar features for fused baselines.
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExampleSplit {
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub test: Vec<Example>,
}

impl ExampleSplit {
    pub fn partition(&self, p: Partition) -> &[Example] {
        match p {
            Partition::Train => &self.train,
            Partition::Validation => &self.validation,
            Partition::Test => &self.test,
        }
    }

    fn partition_mut(&mut self, p: Partition) -> &mut Vec<Example> {
        match p {
            Partition::Train => &mut self.train,
            Partition::Validation => &mut self.validation,
            Partition::Test => &mut self.test,
        }
    }
}

impl Example {
    pub fn from_pair(pair: &ContextPair) -> Self {
        Self {
            id: pair.id.clone(),
            label: pair.label,
            target: pair.target.tokens.clone(),
            context: ContextSource::Neighbors(
                pair.neighbors.iter().map(|n| n.tokens.clone()).collect(),
            ),
            extra: vec![],
        }
    }
}

/// Turn a dataset into model inputs for `config.variant`.
///
/// `I+R` draws `K` distinct reviews uniformly from the same partition
/// (excluding the target) once per pair; `I+N` draws a `Uniform[0,1]^m`
/// context vector once per pair. Fused baselines standardize their feature
/// with training-partition statistics.
pub fn make_variant<R: Rng + ?Sized>(
    split: &DatasetSplit,
    config: &ModelConfig,
    rng: &mut R,
) -> Result<ExampleSplit> {
    config.validate()?;
    if config.variant == Variant::RandomNeighbors && config.weighting == WeightingScheme::Sfr {
        return Err(NapError::config("SFR weighting is not defined for random neighbors (I+R)"));
    }
    let standardizer = match config.variant {
        Variant::Fused(kind) => Some((
            kind,
            Standardizer::fit(split.train.iter().map(|p| &p.target), &[kind])?,
        )),
        _ => None,
    };

    let mut out = ExampleSplit::default();
    for p in Partition::ALL {
        let pairs = split.partition(p);
        let pool = if config.variant == Variant::RandomNeighbors {
            review_pool(pairs)
        } else {
            vec![]
        };
        for pair in pairs {
            if config.variant.uses_neighbors() && pair.k() != config.k {
                return Err(NapError::shape(format!(
                    "pair {} has {} neighbors, model expects K={}",
                    pair.id,
                    pair.k(),
                    config.k
                )));
            }
            let mut ex = Example::from_pair(pair);
            match config.variant {
                Variant::RandomNeighbors => {
                    let candidates: Vec<&EncodedReview> = pool
                        .iter()
                        .copied()
                        .filter(|r| !same_review(r, &pair.target))
                        .collect();
                    if candidates.len() < config.k {
                        return Err(NapError::data(format!(
                            "{} partition has too few reviews to draw {} random neighbors",
                            p.name(),
                            config.k
                        )));
                    }
                    let mut picks = index::sample(rng, candidates.len(), config.k).into_vec();
                    picks.sort_unstable();
                    ex.context = ContextSource::Neighbors(
                        picks.into_iter().map(|i| candidates[i].tokens.clone()).collect(),
                    );
                }
                Variant::Noise => {
                    ex.context = ContextSource::Noise(
                        (0..config.kernels).map(|_| rng.gen_range(0.0..=1.0)).collect(),
                    );
                }
                Variant::Fused(kind) => {
                    let (_, st) = standardizer.as_ref().expect("fitted above");
                    ex.extra = st.transform(&pair.target, &[kind])?;
                }
                _ => {}
            }
            out.partition_mut(p).push(ex);
        }
    }
    Ok(out)
}

fn same_review(a: &EncodedReview, b: &EncodedReview) -> bool {
    a.item_id == b.item_id && a.review_id == b.review_id
}

/// Distinct reviews (targets and neighbors) of a partition, in first-seen order.
fn review_pool(pairs: &[ContextPair]) -> Vec<&EncodedReview> {
    let mut seen: HashMap<(&str, &str), ()> = HashMap::new();
    let mut pool = Vec::new();
    for p in pairs {
        for r in std::iter::once(&p.target).chain(&p.neighbors) {
            if seen.insert((&r.item_id, &r.review_id), ()).is_none() {
                pool.push(r);
            }
        }
    }
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_codes_round_trip() {
        for code in ["I", "P", "F", "S", "I+P", "I+F", "I+S", "I+R", "I+N", "I+ORD_D", "I+CON"] {
            let v: Variant = code.parse().unwrap();
            assert_eq!(v.to_string(), code);
        }
        assert!("X".parse::<Variant>().is_err());
    }
}
