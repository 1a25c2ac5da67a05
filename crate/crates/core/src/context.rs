//! Context embedding from the `K` neighbor embeddings.
//!
//! Neighbor rows are always in ascending position order. For preceding
//! neighbors the closest review is therefore the last row, for following
//! neighbors the first.
//!
//! Four weighting schemes, each generalizing the previous one:
//!
//! * `AVG`: plain mean of the rows.
//! * `WAVG`: softmax attention over rows scored by `tanh(u_a . C_i)`.
//! * `FR`: per-dimension softmax over rows of `tanh(W_b * C)` (Hadamard).
//! * `SFR`: `FR` applied to cumulative sums that push closer neighbors'
//!   information into farther rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NapError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborScheme {
    Preceding,
    Following,
    Surrounding,
}

impl NeighborScheme {
    pub const ALL: [NeighborScheme; 3] = [
        NeighborScheme::Preceding,
        NeighborScheme::Following,
        NeighborScheme::Surrounding,
    ];

    pub fn code(self) -> &'static str {
        match self {
            NeighborScheme::Preceding => "P",
            NeighborScheme::Following => "F",
            NeighborScheme::Surrounding => "S",
        }
    }

    pub fn validate_k(self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(NapError::config("K must be at least 1"));
        }
        if self == NeighborScheme::Surrounding && k % 2 == 1 {
            return Err(NapError::config(format!(
                "surrounding neighbors need an even K, got {k}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for NeighborScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborScheme::Preceding => "preceding",
            NeighborScheme::Following => "following",
            NeighborScheme::Surrounding => "surrounding",
        })
    }
}

impl FromStr for NeighborScheme {
    type Err = NapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p" | "preceding" => Ok(NeighborScheme::Preceding),
            "f" | "following" => Ok(NeighborScheme::Following),
            "s" | "surrounding" => Ok(NeighborScheme::Surrounding),
            other => Err(NapError::config(format!("unknown neighbor scheme {other:?}"))),
        }
    }
}

/// Weighting schemes, declared from simplest to most complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WeightingScheme {
    Avg,
    Wavg,
    Fr,
    Sfr,
}

impl WeightingScheme {
    pub const ALL: [WeightingScheme; 4] = [
        WeightingScheme::Avg,
        WeightingScheme::Wavg,
        WeightingScheme::Fr,
        WeightingScheme::Sfr,
    ];

    /// Trainable parameters for embedding width `m` and `k` neighbors.
    pub fn parameter_count(self, m: usize, k: usize) -> usize {
        match self {
            WeightingScheme::Avg => 0,
            WeightingScheme::Wavg => m,
            WeightingScheme::Fr | WeightingScheme::Sfr => m * k,
        }
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingScheme::Avg => "AVG",
            WeightingScheme::Wavg => "WAVG",
            WeightingScheme::Fr => "FR",
            WeightingScheme::Sfr => "SFR",
        })
    }
}

impl FromStr for WeightingScheme {
    type Err = NapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AVG" => Ok(WeightingScheme::Avg),
            "WAVG" => Ok(WeightingScheme::Wavg),
            "FR" => Ok(WeightingScheme::Fr),
            "SFR" => Ok(WeightingScheme::Sfr),
            other => Err(NapError::config(format!("unknown weighting scheme {other:?}"))),
        }
    }
}

/// `K x m` stack of neighbor embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMatrix {
    k: usize,
    m: usize,
    data: Vec<f64>,
}

impl ContextMatrix {
    pub fn new(k: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if k == 0 || m == 0 || data.len() != k * m {
            return Err(NapError::shape(format!(
                "context matrix needs {k}x{m} values, got {}",
                data.len()
            )));
        }
        Ok(Self { k, m, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(NapError::shape("ragged context rows"));
        }
        Self::new(rows.len(), m, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "UPPERCASE")]
pub enum WeightingParams {
    Avg,
    Wavg { query: Vec<f64> },
    Fr { weights: Vec<f64> },
    Sfr { weights: Vec<f64> },
}

impl WeightingParams {
    pub fn zeros(scheme: WeightingScheme, m: usize, k: usize) -> Self {
        match scheme {
            WeightingScheme::Avg => WeightingParams::Avg,
            WeightingScheme::Wavg => WeightingParams::Wavg { query: vec![0.0; m] },
            WeightingScheme::Fr => WeightingParams::Fr {
                weights: vec![0.0; m * k],
            },
            WeightingScheme::Sfr => WeightingParams::Sfr {
                weights: vec![0.0; m * k],
            },
        }
    }

    pub fn scheme(&self) -> WeightingScheme {
        match self {
            WeightingParams::Avg => WeightingScheme::Avg,
            WeightingParams::Wavg { .. } => WeightingScheme::Wavg,
            WeightingParams::Fr { .. } => WeightingScheme::Fr,
            WeightingParams::Sfr { .. } => WeightingScheme::Sfr,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.values().map_or(0, <[f64]>::len)
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            WeightingParams::Avg => None,
            WeightingParams::Wavg { query } => Some(query),
            WeightingParams::Fr { weights } | WeightingParams::Sfr { weights } => Some(weights),
        }
    }

    pub fn values_mut(&mut self) -> Option<&mut [f64]> {
        match self {
            WeightingParams::Avg => None,
            WeightingParams::Wavg { query } => Some(query),
            WeightingParams::Fr { weights } | WeightingParams::Sfr { weights } => Some(weights),
        }
    }

    /// Compute the context embedding of `c` with these parameters.
    pub fn apply(&self, c: &ContextMatrix, neighbors: NeighborScheme) -> Result<ContextEmbedding> {
        match self {
            WeightingParams::Avg => Ok(weight_avg(c)),
            WeightingParams::Wavg { query } => weight_wavg(c, query),
            WeightingParams::Fr { weights } => weight_fr(c, weights),
            WeightingParams::Sfr { weights } => weight_sfr(c, weights, neighbors),
        }
    }
}

/// Attention weights kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub enum Attention {
    /// `1/K` per neighbor.
    Uniform(usize),
    /// One weight per neighbor (`alpha`).
    Rows(Vec<f64>),
    /// `K x m` weights, each column sums to one (`beta`).
    Features { k: usize, m: usize, beta: Vec<f64> },
}

impl Attention {
    /// Per-neighbor weight; for per-feature attention, the mean over columns.
    pub fn neighbor_weights(&self) -> Vec<f64> {
        match self {
            Attention::Uniform(k) => vec![1.0 / *k as f64; *k],
            Attention::Rows(alpha) => alpha.clone(),
            Attention::Features { k, m, beta } => (0..*k)
                .map(|i| beta[i * m..(i + 1) * m].iter().sum::<f64>() / *m as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextEmbedding {
    pub values: Vec<f64>,
    pub attention: Attention,
    /// tanh scores (`z` for WAVG, `Z` for FR/SFR), kept for backward.
    scores: Vec<f64>,
}

/// Softmax with max subtraction.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

pub fn weight_avg(c: &ContextMatrix) -> ContextEmbedding {
    let mut values = vec![0.0; c.m];
    for i in 0..c.k {
        for (v, &x) in values.iter_mut().zip(c.row(i)) {
            *v += x;
        }
    }
    let k = c.k as f64;
    values.iter_mut().for_each(|v| *v /= k);
    ContextEmbedding {
        values,
        attention: Attention::Uniform(c.k),
        scores: vec![],
    }
}

pub fn weight_wavg(c: &ContextMatrix, query: &[f64]) -> Result<ContextEmbedding> {
    if query.len() != c.m {
        return Err(NapError::shape(format!(
            "query has {} entries, embeddings have {}",
            query.len(),
            c.m
        )));
    }
    let z: Vec<f64> = (0..c.k)
        .map(|i| dot(query, c.row(i)).tanh())
        .collect();
    let alpha = softmax(&z);
    let mut values = vec![0.0; c.m];
    for (i, &a) in alpha.iter().enumerate() {
        for (v, &x) in values.iter_mut().zip(c.row(i)) {
            *v += a * x;
        }
    }
    Ok(ContextEmbedding {
        values,
        attention: Attention::Rows(alpha),
        scores: z,
    })
}

pub fn weight_fr(c: &ContextMatrix, weights: &[f64]) -> Result<ContextEmbedding> {
    if weights.len() != c.k * c.m {
        return Err(NapError::shape(format!(
            "feature-regression weights have {} entries, expected {}x{}",
            weights.len(),
            c.k,
            c.m
        )));
    }
    let (k, m) = (c.k, c.m);
    let scores: Vec<f64> = weights
        .iter()
        .zip(&c.data)
        .map(|(w, x)| (w * x).tanh())
        .collect();
    let mut beta = vec![0.0; k * m];
    let mut values = vec![0.0; m];
    let mut column = vec![0.0; k];
    for j in 0..m {
        for i in 0..k {
            column[i] = scores[i * m + j];
        }
        for (i, b) in softmax(&column).into_iter().enumerate() {
            beta[i * m + j] = b;
            values[j] += b * c.get(i, j);
        }
    }
    Ok(ContextEmbedding {
        values,
        attention: Attention::Features { k, m, beta },
        scores,
    })
}

/// Cumulative sums toward the target: suffix sums for preceding
/// neighbors, prefix sums for following ones, and each half of a
/// surrounding window treated on its own.
pub fn spatial_cumsum(c: &ContextMatrix, neighbors: NeighborScheme) -> ContextMatrix {
    let mut out = c.clone();
    let m = c.m;
    let mut suffix = |lo: usize, hi: usize| {
        for i in (lo..hi.saturating_sub(1)).rev() {
            for j in 0..m {
                out.data[i * m + j] += out.data[(i + 1) * m + j];
            }
        }
    };
    match neighbors {
        NeighborScheme::Preceding => suffix(0, c.k),
        NeighborScheme::Following => {}
        NeighborScheme::Surrounding => suffix(0, c.k / 2),
    }
    let prefix_from = match neighbors {
        NeighborScheme::Preceding => c.k,
        NeighborScheme::Following => 0,
        NeighborScheme::Surrounding => c.k / 2,
    };
    for i in prefix_from + 1..c.k {
        for j in 0..m {
            out.data[i * m + j] += out.data[(i - 1) * m + j];
        }
    }
    out
}

/// Transpose of [`spatial_cumsum`], used to push gradients back.
fn spatial_cumsum_transpose(grad: &mut [f64], k: usize, m: usize, neighbors: NeighborScheme) {
    let split = match neighbors {
        NeighborScheme::Preceding => k,
        NeighborScheme::Following => 0,
        NeighborScheme::Surrounding => k / 2,
    };
    // suffix-sum rows in [0, split) become prefix sums of the gradient
    for i in 1..split {
        for j in 0..m {
            grad[i * m + j] += grad[(i - 1) * m + j];
        }
    }
    // prefix-sum rows in [split, k) become suffix sums of the gradient
    for i in (split..k.saturating_sub(1)).rev() {
        for j in 0..m {
            grad[i * m + j] += grad[(i + 1) * m + j];
        }
    }
}

pub fn weight_sfr(
    c: &ContextMatrix,
    weights: &[f64],
    neighbors: NeighborScheme,
) -> Result<ContextEmbedding> {
    neighbors.validate_k(c.k)?;
    weight_fr(&spatial_cumsum(c, neighbors), weights)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Given `dL/dc`, accumulate `dL/dC` into `grad_c` (length `K*m`) and the
/// parameter gradient into `grad_params` (same variant as `params`).
pub fn backward(
    c: &ContextMatrix,
    params: &WeightingParams,
    neighbors: NeighborScheme,
    out: &ContextEmbedding,
    grad_out: &[f64],
    grad_c: &mut [f64],
    grad_params: &mut WeightingParams,
) {
    let (k, m) = (c.k, c.m);
    match (params, grad_params) {
        (WeightingParams::Avg, _) => {
            let inv = 1.0 / k as f64;
            for i in 0..k {
                for j in 0..m {
                    grad_c[i * m + j] += grad_out[j] * inv;
                }
            }
        }
        (WeightingParams::Wavg { query }, WeightingParams::Wavg { query: grad_query }) => {
            let Attention::Rows(alpha) = &out.attention else {
                unreachable!("WAVG output carries row attention")
            };
            let grad_alpha: Vec<f64> = (0..k).map(|i| dot(grad_out, c.row(i))).collect();
            let mean: f64 = alpha.iter().zip(&grad_alpha).map(|(a, g)| a * g).sum();
            for i in 0..k {
                let grad_s = alpha[i] * (grad_alpha[i] - mean) * (1.0 - out.scores[i].powi(2));
                for j in 0..m {
                    grad_c[i * m + j] += alpha[i] * grad_out[j] + grad_s * query[j];
                    grad_query[j] += grad_s * c.get(i, j);
                }
            }
        }
        (WeightingParams::Fr { weights }, WeightingParams::Fr { weights: grad_w }) => {
            fr_backward(c, weights, out, grad_out, grad_c, grad_w);
        }
        (WeightingParams::Sfr { weights }, WeightingParams::Sfr { weights: grad_w }) => {
            let cum = spatial_cumsum(c, neighbors);
            let mut grad_cum = vec![0.0; k * m];
            fr_backward(&cum, weights, out, grad_out, &mut grad_cum, grad_w);
            spatial_cumsum_transpose(&mut grad_cum, k, m, neighbors);
            for (g, d) in grad_c.iter_mut().zip(grad_cum) {
                *g += d;
            }
        }
        _ => panic!("gradient buffer does not match weighting scheme"),
    }
}

fn fr_backward(
    c: &ContextMatrix,
    weights: &[f64],
    out: &ContextEmbedding,
    grad_out: &[f64],
    grad_c: &mut [f64],
    grad_w: &mut [f64],
) {
    let (k, m) = (c.k, c.m);
    let Attention::Features { beta, .. } = &out.attention else {
        unreachable!("FR output carries feature attention")
    };
    for j in 0..m {
        let mean: f64 = (0..k)
            .map(|i| beta[i * m + j] * grad_out[j] * c.get(i, j))
            .sum();
        for i in 0..k {
            let idx = i * m + j;
            let grad_beta = grad_out[j] * c.data[idx];
            let grad_s = beta[idx] * grad_beta - beta[idx] * mean;
            let grad_s = grad_s * (1.0 - out.scores[idx].powi(2));
            grad_c[idx] += beta[idx] * grad_out[j] + grad_s * weights[idx];
            grad_w[idx] += grad_s * c.data[idx];
        }
    }
}
