//! Plain-text `key = value` run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::sweep::SweepGrid;
use super::synthetic::SyntheticConfig;
use crate::context::{NeighborScheme, WeightingScheme};
use crate::corpus::{FilterConfig, PrepareConfig, SplitFractions, DEFAULT_MAX_TERMS};
use crate::error::{NapError, Result};
use crate::model::{ModelConfig, TrainConfig, Variant};

/// Parse `key = value` lines. Blank lines and lines starting with `#` are
/// ignored, as is anything after a `#` that follows whitespace.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #").or_else(|| raw.find("\t#")) {
            Some(at) => &raw[..at],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            NapError::config(format!("config line {}: expected `key = value`, got {line:?}", i + 1))
        })?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

/// Everything a command may need, with defaults for a desk-scale run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub data: PathBuf,
    pub out: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub prepare: PrepareConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub sweep: SweepGrid,
    pub synthetic: SyntheticConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            corpus: None,
            embeddings: None,
            lexicon: None,
            data: PathBuf::from("prepared"),
            out: PathBuf::from("runs"),
            checkpoint: None,
            seed: 42,
            threads: 0,
            prepare: PrepareConfig {
                filter: FilterConfig::default(),
                fractions: SplitFractions::default(),
                max_terms: DEFAULT_MAX_TERMS,
            },
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            sweep: SweepGrid::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

/// Every key understood by [`Settings::set`].
pub const KEYS: &[&str] = &[
    "corpus",
    "embeddings",
    "lexicon",
    "data",
    "out",
    "checkpoint",
    "seed",
    "threads",
    "max_terms",
    "min_reviews",
    "min_month_reviews",
    "early_cutoff",
    "late_cutoff",
    "train_fraction",
    "val_fraction",
    "test_fraction",
    "variant",
    "neighbor_scheme",
    "k",
    "weighting",
    "gamma",
    "weight_decay",
    "window",
    "dim",
    "kernels",
    "max_len",
    "batch_size",
    "learning_rate",
    "patience",
    "max_epochs",
    "repetitions",
    "sweep.k",
    "sweep.neighbor_schemes",
    "sweep.weightings",
    "sweep.gammas",
    "sweep.variants",
    "sweep.delta",
    "synthetic.items",
    "synthetic.reviews_per_item",
    "synthetic.vocab_size",
    "synthetic.rho",
    "synthetic.review_len",
    "synthetic.sharpness",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| NapError::config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `a..b` (inclusive) or a comma list.
fn parse_usize_range(key: &str, value: &str) -> Result<Vec<usize>> {
    match value.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (parse(key, a.trim())?, parse(key, b.trim())?);
            Ok((a..=b).collect())
        }
        None => parse_list(key, value),
    }
}

fn optional_date(key: &str, value: &str) -> Result<Option<NaiveDate>> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty() && value != "none").then(|| PathBuf::from(value))
}

impl Settings {
    /// Defaults overridden by a config file, then by `overrides`.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| NapError::io(path, e))?;
            for (k, v) in parse_key_values(&text)? {
                s.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            s.set(k, v)?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let m = &mut self.model;
        let t = &mut self.train;
        let f = &mut self.prepare.fractions;
        match key {
            "corpus" => self.corpus = optional_path(value),
            "embeddings" => self.embeddings = optional_path(value),
            "lexicon" => self.lexicon = optional_path(value),
            "data" => self.data = PathBuf::from(value),
            "out" => self.out = PathBuf::from(value),
            "checkpoint" => self.checkpoint = optional_path(value),
            "seed" => {
                self.seed = parse(key, value)?;
                t.seed = self.seed;
                self.synthetic.seed = self.seed;
            }
            "threads" => self.threads = parse(key, value)?,
            "max_terms" => self.prepare.max_terms = parse(key, value)?,
            "min_reviews" => self.prepare.filter.min_reviews = parse(key, value)?,
            "min_month_reviews" => self.prepare.filter.min_month_reviews = parse(key, value)?,
            "early_cutoff" => self.prepare.filter.early_cutoff = optional_date(key, value)?,
            "late_cutoff" => self.prepare.filter.late_cutoff = optional_date(key, value)?,
            "train_fraction" => f.train = parse(key, value)?,
            "val_fraction" => f.validation = parse(key, value)?,
            "test_fraction" => f.test = parse(key, value)?,
            "variant" => {
                let v: Variant = parse(key, value)?;
                *m = m.for_variant(v);
            }
            "neighbor_scheme" => {
                let s: NeighborScheme = parse(key, value)?;
                m.neighbor_scheme = s;
                if let Variant::Contextual(_) = m.variant {
                    m.variant = Variant::Contextual(s);
                } else if let Variant::NeighborOnly(_) = m.variant {
                    m.variant = Variant::NeighborOnly(s);
                }
            }
            "k" => m.k = parse(key, value)?,
            "weighting" => m.weighting = parse::<WeightingScheme>(key, value)?,
            "gamma" => m.gamma = parse(key, value)?,
            "weight_decay" => m.weight_decay = parse(key, value)?,
            "window" => m.window = parse(key, value)?,
            "dim" => {
                m.dim = parse(key, value)?;
                self.synthetic.dim = m.dim;
            }
            "kernels" => m.kernels = parse(key, value)?,
            "max_len" => m.max_len = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "patience" => t.patience = parse(key, value)?,
            "max_epochs" => t.max_epochs = parse(key, value)?,
            "repetitions" => t.repetitions = parse(key, value)?,
            "sweep.k" => self.sweep.ks = parse_usize_range(key, value)?,
            "sweep.neighbor_schemes" => self.sweep.neighbor_schemes = parse_list(key, value)?,
            "sweep.weightings" => self.sweep.weightings = parse_list(key, value)?,
            "sweep.gammas" => self.sweep.gammas = parse_list(key, value)?,
            "sweep.variants" => self.sweep.variants = parse_list(key, value)?,
            "sweep.delta" => self.sweep.delta = parse(key, value)?,
            "synthetic.items" => self.synthetic.items = parse(key, value)?,
            "synthetic.reviews_per_item" => self.synthetic.reviews_per_item = parse(key, value)?,
            "synthetic.vocab_size" => self.synthetic.vocab_size = parse(key, value)?,
            "synthetic.rho" => self.synthetic.rho = parse(key, value)?,
            "synthetic.review_len" => self.synthetic.review_len = parse(key, value)?,
            "synthetic.sharpness" => self.synthetic.sharpness = parse(key, value)?,
            other => return Err(NapError::config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Key/value view of the effective settings, for run manifests.
    pub fn to_map(&self) -> BTreeMap<String, serde_json::Value> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        }
    }
}
