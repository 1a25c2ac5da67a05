//! Convolutional review encoder: sliding-window convolution, ELU and
//! column-wise max pooling, with the matching backward pass.
//!
//! Kernels are stored flat as `[window][dim][kernel]`, so the `m` weights
//! that multiply a single input value are contiguous.

use serde::{Deserialize, Serialize};

use crate::embeddings::ReviewMatrix;
use crate::error::{NapError, Result};

pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_KERNELS: usize = 100;

pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

/// Derivative of [`elu`] at pre-activation `x`.
pub fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub window: usize,
    pub dim: usize,
    pub kernels: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParams {
    pub fn zeros(window: usize, dim: usize, kernels: usize) -> Self {
        Self {
            window,
            dim,
            kernels,
            weights: vec![0.0; window * dim * kernels],
            bias: vec![0.0; kernels],
        }
    }

    pub fn weight_index(&self, offset: usize, feature: usize, kernel: usize) -> usize {
        (offset * self.dim + feature) * self.kernels + kernel
    }

    pub fn check(&self) -> Result<()> {
        if self.window == 0 || self.dim == 0 || self.kernels == 0 {
            return Err(NapError::shape("convolution sizes must be positive"));
        }
        if self.weights.len() != self.window * self.dim * self.kernels
            || self.bias.len() != self.kernels
        {
            return Err(NapError::shape(format!(
                "kernel tensor {} / bias {} inconsistent with {}x{}x{}",
                self.weights.len(),
                self.bias.len(),
                self.window,
                self.dim,
                self.kernels
            )));
        }
        Ok(())
    }

    pub fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// Activated feature maps, one row per convolution window.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    kernels: usize,
    pre: Vec<f64>,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl FeatureMaps {
    pub fn windows(&self) -> usize {
        self.valid.len()
    }

    pub fn kernels(&self) -> usize {
        self.kernels
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.kernels..(t + 1) * self.kernels]
    }

    pub fn pre_activation(&self, t: usize, j: usize) -> f64 {
        self.pre[t * self.kernels + j]
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }
}

/// Max-pooled review embedding `h`, plus the winning window per kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewEmbedding {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

/// Valid convolution over the real tokens. A review shorter than the
/// window is right-padded with zero rows so exactly one window exists; a
/// review without tokens has no windows.
pub fn convolve_elu(x: &ReviewMatrix, params: &ConvParams) -> Result<FeatureMaps> {
    params.check()?;
    if x.dim() != params.dim {
        return Err(NapError::shape(format!(
            "review matrix width {} but kernels expect {}",
            x.dim(),
            params.dim
        )));
    }
    let (l, d, m) = (params.window, params.dim, params.kernels);
    let n = x.len();
    let windows = if n == 0 { 0 } else { n.max(l) - l + 1 };
    let mut pre = Vec::with_capacity(windows * m);
    for t in 0..windows {
        let start = pre.len();
        pre.extend_from_slice(&params.bias);
        let acc = &mut pre[start..];
        for a in 0..l.min(n - t) {
            let row = x.row(t + a);
            for (b, &xv) in row.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                let w = &params.weights[(a * d + b) * m..(a * d + b + 1) * m];
                for (s, &wj) in acc.iter_mut().zip(w) {
                    *s += xv * wj;
                }
            }
        }
    }
    let values = pre.iter().map(|&z| elu(z)).collect();
    Ok(FeatureMaps {
        kernels: m,
        pre,
        values,
        valid: vec![true; windows],
    })
}

/// Column-wise max over valid windows; ties go to the lowest window index.
pub fn max_pool(maps: &FeatureMaps) -> Result<ReviewEmbedding> {
    let m = maps.kernels;
    let mut values = vec![f64::NEG_INFINITY; m];
    let mut argmax = vec![usize::MAX; m];
    for t in (0..maps.windows()).filter(|&t| maps.valid[t]) {
        for (j, &v) in maps.row(t).iter().enumerate() {
            if v > values[j] {
                values[j] = v;
                argmax[j] = t;
            }
        }
    }
    if argmax.contains(&usize::MAX) {
        return Err(NapError::data("empty review after padding rules"));
    }
    Ok(ReviewEmbedding { values, argmax })
}

pub fn encode(x: &ReviewMatrix, params: &ConvParams) -> Result<(FeatureMaps, ReviewEmbedding)> {
    let maps = convolve_elu(x, params)?;
    let h = max_pool(&maps)?;
    Ok((maps, h))
}

/// Accumulate `dL/dW_c` and `dL/db_c` given `dL/dh` for one encoded review.
/// Only the argmax window of each kernel receives gradient.
pub fn backward(
    x: &ReviewMatrix,
    maps: &FeatureMaps,
    h: &ReviewEmbedding,
    grad_h: &[f64],
    grads: &mut ConvParams,
) {
    let (l, d, m) = (grads.window, grads.dim, grads.kernels);
    let n = x.len();
    for (j, &g) in grad_h.iter().enumerate().take(m) {
        if g == 0.0 {
            continue;
        }
        let t = h.argmax[j];
        let dz = g * elu_grad(maps.pre_activation(t, j));
        grads.bias[j] += dz;
        for a in 0..l.min(n - t) {
            for (b, &xv) in x.row(t + a).iter().enumerate() {
                grads.weights[(a * d + b) * m + j] += dz * xv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]], max_len: usize) -> ReviewMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        ReviewMatrix::from_rows(rows[0].len(), max_len, &rows).unwrap()
    }

    #[test]
    fn zero_params_give_zero_maps() {
        let x = matrix(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], &[7.0, 8.0]], 6);
        let maps = convolve_elu(&x, &ConvParams::zeros(3, 2, 5)).unwrap();
        assert_eq!(maps.windows(), 2);
        assert!(maps.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_by_one_toy() {
        let x = matrix(&[&[3.0]], 1);
        let p = ConvParams {
            window: 1,
            dim: 1,
            kernels: 1,
            weights: vec![2.0],
            bias: vec![1.0],
        };
        let maps = convolve_elu(&x, &p).unwrap();
        assert_eq!(maps.row(0), &[7.0]);
    }

    #[test]
    fn short_review_gets_single_window() {
        let x = matrix(&[&[1.0]], 4);
        let mut p = ConvParams::zeros(3, 1, 1);
        p.weights = vec![1.0, 10.0, 100.0];
        let maps = convolve_elu(&x, &p).unwrap();
        assert_eq!(maps.windows(), 1);
        assert_eq!(maps.row(0), &[1.0]);
    }

    #[test]
    fn dim_mismatch_is_error() {
        let x = matrix(&[&[1.0, 2.0]], 2);
        assert!(matches!(
            convolve_elu(&x, &ConvParams::zeros(1, 3, 1)),
            Err(NapError::Shape(_))
        ));
    }

    #[test]
    fn pooling_max_and_ties() {
        let maps = FeatureMaps {
            kernels: 2,
            pre: vec![-0.5, 1.0, 2.0, 1.0, 1.0, 1.0],
            values: vec![-0.5, 1.0, 2.0, 1.0, 1.0, 1.0],
            valid: vec![true; 3],
        };
        let h = max_pool(&maps).unwrap();
        assert_eq!(h.values, vec![2.0, 1.0]);
        assert_eq!(h.argmax, vec![1, 0]);

        let empty = FeatureMaps {
            kernels: 2,
            pre: vec![],
            values: vec![],
            valid: vec![],
        };
        assert!(max_pool(&empty).unwrap_err().to_string().contains("empty review"));
    }

    #[test]
    fn elu_lower_bound() {
        for x in [-1e6, -50.0, -1.0, 0.0, 3.0] {
            assert!(elu(x) >= -1.0);
        }
        assert_eq!(elu(-1e6), -1.0);
    }

    #[test]
    fn gradient_flows_to_lowest_argmax_only() {
        // Two identical windows: the tie goes to window 0.
        let x = matrix(&[&[1.0], &[1.0]], 2);
        let p = ConvParams {
            window: 1,
            dim: 1,
            kernels: 1,
            weights: vec![0.5],
            bias: vec![0.0],
        };
        let (maps, h) = encode(&x, &p).unwrap();
        assert_eq!(h.argmax, vec![0]);
        let mut g = ConvParams::zeros(1, 1, 1);
        backward(&x, &maps, &h, &[1.0], &mut g);
        assert_eq!(g.weights, vec![1.0]);
        assert_eq!(g.bias, vec![1.0]);
    }
}
