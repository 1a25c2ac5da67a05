//! Grid sweeps over context settings and the comparable-alternative search.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::{mean_accuracy, run_once};
use crate::context::{NeighborScheme, WeightingScheme};
use crate::corpus::PreparedCorpus;
use crate::embeddings::EmbeddingTable;
use crate::error::{NapError, Result};
use crate::model::{ModelConfig, TrainConfig, Variant};

/// Largest accuracy drop (as a fraction) an alternative may have.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Hyperparameter grid. For variants tied to a neighbor scheme (`P`,
/// `I+S`, ...) the scheme is taken from the grid, not the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ks: Vec<usize>,
    pub neighbor_schemes: Vec<NeighborScheme>,
    pub weightings: Vec<WeightingScheme>,
    pub gammas: Vec<f64>,
    pub variants: Vec<Variant>,
    pub delta: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            ks: (1..=10).collect(),
            neighbor_schemes: NeighborScheme::ALL.to_vec(),
            weightings: WeightingScheme::ALL.to_vec(),
            gammas: vec![0.5],
            variants: vec![Variant::Contextual(NeighborScheme::Surrounding)],
            delta: DEFAULT_DELTA,
        }
    }
}

impl SweepGrid {
    pub fn empty() -> Self {
        Self {
            ks: vec![],
            neighbor_schemes: vec![],
            weightings: vec![],
            gammas: vec![],
            variants: vec![],
            delta: DEFAULT_DELTA,
        }
    }

    /// Every grid cell as a model configuration, split into runnable cells
    /// and skipped ones with the reason.
    pub fn cells(&self, base: &ModelConfig) -> (Vec<ModelConfig>, Vec<SkippedCell>) {
        let mut run = Vec::new();
        let mut skipped = Vec::new();
        for &variant in &self.variants {
            for &ns in &self.neighbor_schemes {
                for &k in &self.ks {
                    for (wi, &w) in self.weightings.iter().enumerate() {
                        for (gi, &gamma) in self.gammas.iter().enumerate() {
                            let variant = match variant {
                                Variant::Contextual(_) => Variant::Contextual(ns),
                                Variant::NeighborOnly(_) => Variant::NeighborOnly(ns),
                                v => v,
                            };
                            let cfg = ModelConfig {
                                variant,
                                neighbor_scheme: ns,
                                k,
                                weighting: w,
                                gamma,
                                ..base.for_variant(variant)
                            };
                            let reason = if wi > 0 && cfg.effective_weighting() != w {
                                Some(format!("weighting is unused by {variant}"))
                            } else if gi > 0 && cfg.effective_gamma() != gamma {
                                Some(format!("gamma is fixed for {variant}"))
                            } else {
                                cfg.validate().err().map(|e| e.to_string())
                            };
                            match reason {
                                Some(reason) => {
                                    log::info!("skipping {}: {reason}", CellKey::of(&cfg));
                                    skipped.push(SkippedCell {
                                        cell: CellKey::of(&cfg),
                                        reason,
                                    });
                                }
                                None => run.push(cfg),
                            }
                        }
                    }
                }
            }
        }
        (run, skipped)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub variant: Variant,
    pub neighbor_scheme: NeighborScheme,
    #[serde(rename = "K")]
    pub k: usize,
    pub weighting: WeightingScheme,
    pub gamma: f64,
}

impl CellKey {
    pub fn of(cfg: &ModelConfig) -> Self {
        Self {
            variant: cfg.variant,
            neighbor_scheme: cfg.neighbor_scheme,
            k: cfg.k,
            weighting: cfg.effective_weighting(),
            gamma: cfg.effective_gamma(),
        }
    }

    /// `Weighting Scheme/#Neighbors`, e.g. `SFR/4`.
    pub fn annotation(&self) -> String {
        format!("{}/{}", self.weighting, self.k)
    }
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} K={} {} gamma={}",
            self.variant, self.neighbor_scheme, self.k, self.weighting, self.gamma
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub cell: CellKey,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: CellKey,
    pub annotation: String,
    pub mean_accuracy: f64,
    pub accuracies: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub cell: CellKey,
    pub mean_accuracy: f64,
    /// Accuracy given up relative to the best cell.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub delta: f64,
    pub cells: Vec<CellSummary>,
    pub skipped: Vec<SkippedCell>,
    pub best: Option<CellSummary>,
    pub alternatives: Vec<Alternative>,
}

/// Cells whose neighbors feed the prediction form one family; other
/// variants are only compared with themselves.
fn family(v: Variant) -> String {
    match v {
        Variant::Contextual(_) => "I+context".into(),
        Variant::NeighborOnly(_) => "context-only".into(),
        other => other.to_string(),
    }
}

/// Settings of the best cell's family that use fewer neighbors, a scheme
/// no more complex than the best one's, and lose at most `delta` accuracy.
pub fn comparable_alternatives(cells: &[CellSummary], best: &CellSummary, delta: f64) -> Vec<Alternative> {
    let mut alts: Vec<Alternative> = cells
        .iter()
        .filter(|c| family(c.cell.variant) == family(best.cell.variant))
        .filter(|c| c.cell.k < best.cell.k && c.cell.weighting <= best.cell.weighting)
        .map(|c| Alternative {
            cell: c.cell.clone(),
            mean_accuracy: c.mean_accuracy,
            drop: best.mean_accuracy - c.mean_accuracy,
        })
        .filter(|a| a.drop.abs() <= delta + 1e-12)
        .collect();
    alts.sort_by(|a, b| a.drop.total_cmp(&b.drop));
    alts
}

/// Train every runnable cell `train_cfg.repetitions` times (seeds
/// `seed + r`). Cells run in parallel; the report is assembled in grid order.
pub fn run_sweep(
    corpus: &PreparedCorpus,
    table: &EmbeddingTable,
    grid: &SweepGrid,
    base: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<SweepReport> {
    let (cells, mut skipped) = grid.cells(base);
    let reps = train_cfg.repetitions.max(1) as u64;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            run_once(corpus, table, &cells[c], train_cfg, train_cfg.seed + r).map(|run| run.test_accuracy)
        })
        .collect();

    let mut outcomes = outcomes.into_iter();
    let mut summaries = Vec::new();
    for cfg in &cells {
        let mut accs = Vec::new();
        let mut failure = None;
        for outcome in outcomes.by_ref().take(reps as usize) {
            match outcome {
                Ok(a) => accs.push(a),
                // data problems in a cell (e.g. too few pairs for this K)
                // skip the cell; numeric failures abort the sweep
                Err(e @ (NapError::Data(_) | NapError::Shape(_))) => failure = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        let key = CellKey::of(cfg);
        if let Some(reason) = failure {
            log::warn!("skipping {key}: {reason}");
            skipped.push(SkippedCell { cell: key, reason });
            continue;
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        summaries.push(CellSummary {
            annotation: key.annotation(),
            cell: key,
            mean_accuracy: mean,
            accuracies: accs,
            seeds: (0..reps).map(|r| train_cfg.seed + r).collect(),
        });
    }

    let best = summaries
        .iter()
        .fold(None::<&CellSummary>, |acc, c| match acc {
            Some(b) if b.mean_accuracy >= c.mean_accuracy => Some(b),
            _ => Some(c),
        })
        .cloned();
    let alternatives = best
        .as_ref()
        .map(|b| comparable_alternatives(&summaries, b, grid.delta))
        .unwrap_or_default();
    Ok(SweepReport {
        delta: grid.delta,
        cells: summaries,
        skipped,
        best,
        alternatives,
    })
}

impl SweepReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| NapError::io(path, e))
    }

    /// One row per evaluated cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,neighbor_scheme,K,weighting,gamma,mean_accuracy,runs,annotation\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.cell.variant,
                c.cell.neighbor_scheme,
                c.cell.k,
                c.cell.weighting,
                c.cell.gamma,
                c.mean_accuracy,
                c.accuracies.len(),
                c.annotation
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| NapError::io(path, e))
    }
}

/// Summary of finished runs of one configuration.
pub fn summarize(cfg: &ModelConfig, runs: &[crate::model::RunResult]) -> CellSummary {
    let key = CellKey::of(cfg);
    CellSummary {
        annotation: key.annotation(),
        cell: key,
        mean_accuracy: mean_accuracy(runs),
        accuracies: runs.iter().map(|r| r.test_accuracy).collect(),
        seeds: runs.iter().map(|r| r.seed).collect(),
    }
}
