//! The full neighbor-aware classifier: review encoder, context weighting,
//! `gamma`-combination and a logistic output layer.

mod checkpoint;
mod train;
mod variant;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context::{
    self, ContextEmbedding, ContextMatrix, NeighborScheme, WeightingParams, WeightingScheme,
};
use crate::corpus::HelpfulnessLabel;
use crate::embeddings::{embed_review, EmbeddingTable, ReviewMatrix, DEFAULT_EMBEDDING_DIM, DEFAULT_MAX_LEN};
use crate::encoder::{self, ConvParams, FeatureMaps, ReviewEmbedding, DEFAULT_KERNELS, DEFAULT_WINDOW};
use crate::error::{NapError, Result};

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use train::{evaluate, train, Adam, EpochRecord, RunResult, TrainConfig};
pub use variant::{make_variant, ContextSource, Example, ExampleSplit, Variant};

pub const DEFAULT_WEIGHT_DECAY: f64 = 5e-4;
pub const DEFAULT_GAMMA: f64 = 0.5;
/// Probabilities are clipped to `[EPS, 1 - EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub window: usize,
    pub dim: usize,
    pub kernels: usize,
    pub k: usize,
    pub neighbor_scheme: NeighborScheme,
    pub weighting: WeightingScheme,
    pub gamma: f64,
    pub weight_decay: f64,
    pub max_len: usize,
    /// Number of standardized scalar features appended before the output layer.
    pub extra_features: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Contextual(NeighborScheme::Surrounding),
            window: DEFAULT_WINDOW,
            dim: DEFAULT_EMBEDDING_DIM,
            kernels: DEFAULT_KERNELS,
            k: 4,
            neighbor_scheme: NeighborScheme::Surrounding,
            weighting: WeightingScheme::Avg,
            gamma: DEFAULT_GAMMA,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            max_len: DEFAULT_MAX_LEN,
            extra_features: 0,
        }
    }
}

impl ModelConfig {
    /// `gamma` as used in the forward pass: pinned to 1 for independent and
    /// feature-fusion models and to 0 for neighbor-only models.
    pub fn effective_gamma(&self) -> f64 {
        match self.variant {
            Variant::Independent | Variant::Fused(_) => 1.0,
            Variant::NeighborOnly(_) => 0.0,
            _ => self.gamma,
        }
    }

    /// Weighting scheme of the trainable parameters. Models whose context is
    /// unused or not built from neighbor embeddings carry none.
    pub fn effective_weighting(&self) -> WeightingScheme {
        match self.variant {
            Variant::Independent | Variant::Fused(_) | Variant::Noise => WeightingScheme::Avg,
            _ => self.weighting,
        }
    }

    /// Copy of `self` for another variant, with the neighbor scheme and the
    /// number of extra features that the variant implies.
    pub fn for_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            neighbor_scheme: variant.neighbor_scheme().unwrap_or(self.neighbor_scheme),
            extra_features: usize::from(matches!(variant, Variant::Fused(_))),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(NapError::config(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(NapError::config("weight decay must be a non-negative number"));
        }
        if self.window == 0 || self.dim == 0 || self.kernels == 0 || self.max_len == 0 {
            return Err(NapError::config("window, dim, kernels and max_len must be positive"));
        }
        if let Variant::NeighborOnly(s) | Variant::Contextual(s) = self.variant {
            if s != self.neighbor_scheme {
                return Err(NapError::config(format!(
                    "variant {} needs neighbor scheme {s}, config has {}",
                    self.variant, self.neighbor_scheme
                )));
            }
        }
        if self.variant == Variant::RandomNeighbors && self.weighting == WeightingScheme::Sfr {
            return Err(NapError::config(
                "SFR weighting is not defined for random neighbors (I+R)",
            ));
        }
        if let Variant::Fused(_) = self.variant {
            if self.extra_features != 1 {
                return Err(NapError::config("a fused baseline uses exactly one extra feature"));
            }
        }
        self.neighbor_scheme.validate_k(self.k)
    }
}

/// All trainable tensors. Gradients and Adam moments use the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub conv: ConvParams,
    pub weighting: WeightingParams,
    pub out_weights: Vec<f64>,
    pub out_bias: f64,
}

impl Params {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        Self {
            conv: ConvParams::zeros(cfg.window, cfg.dim, cfg.kernels),
            weighting: WeightingParams::zeros(cfg.effective_weighting(), cfg.kernels, cfg.k),
            out_weights: vec![0.0; cfg.kernels + cfg.extra_features],
            out_bias: 0.0,
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_tensor_mut(|_, t| t.fill(0.0));
        z
    }

    /// Visit every trainable tensor in a fixed order.
    pub fn for_each_tensor_mut(&mut self, mut f: impl FnMut(&'static str, &mut [f64])) {
        f("conv.weight", &mut self.conv.weights);
        f("conv.bias", &mut self.conv.bias);
        if let Some(w) = self.weighting.values_mut() {
            f("context.weight", w);
        }
        f("output.weight", &mut self.out_weights);
        f("output.bias", std::slice::from_mut(&mut self.out_bias));
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.conv.weights, &mut self.conv.bias];
        if let Some(w) = self.weighting.values_mut() {
            out.push(w);
        }
        out.push(&mut self.out_weights);
        out.push(std::slice::from_mut(&mut self.out_bias));
        out
    }

    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out: Vec<(&'static str, &[f64])> = vec![
            ("conv.weight", &self.conv.weights),
            ("conv.bias", &self.conv.bias),
        ];
        if let Some(w) = self.weighting.values() {
            out.push(("context.weight", w));
        }
        out.push(("output.weight", &self.out_weights));
        out.push(("output.bias", std::slice::from_ref(&self.out_bias)));
        out
    }

    /// Trainable parameter count of the context weighting.
    pub fn weighting_parameter_count(&self) -> usize {
        self.weighting.parameter_count()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn glorot_fill(values: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) {
    let limit = glorot_limit(fan_in, fan_out);
    let dist = Uniform::new_inclusive(-limit, limit);
    values.iter_mut().for_each(|v| *v = dist.sample(rng));
}

#[derive(Debug, Clone, PartialEq)]
pub struct NapModel {
    pub config: ModelConfig,
    pub params: Params,
}

impl NapModel {
    /// Glorot-uniform weights and zero biases. The convolution and output
    /// layer are drawn before the weighting parameters so that models that
    /// differ only in their context weighting share those draws.
    pub fn initialize(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&config);
        let (l, d, m) = (config.window, config.dim, config.kernels);
        glorot_fill(&mut params.conv.weights, l * d, l * m, &mut rng);
        let fan_in = params.out_weights.len();
        glorot_fill(&mut params.out_weights, fan_in, 1, &mut rng);
        match &mut params.weighting {
            WeightingParams::Avg => {}
            WeightingParams::Wavg { query } => glorot_fill(query, m, 1, &mut rng),
            WeightingParams::Fr { weights } | WeightingParams::Sfr { weights } => {
                glorot_fill(weights, config.k, m, &mut rng)
            }
        }
        Ok(Self { config, params })
    }

    pub fn from_params(config: ModelConfig, params: Params) -> Result<Self> {
        config.validate()?;
        let expected = Params::zeros(&config);
        let shapes_match = expected
            .tensors()
            .iter()
            .zip(params.tensors())
            .all(|((a, x), (b, y))| a == &b && x.len() == y.len())
            && expected.tensors().len() == params.tensors().len();
        if !shapes_match {
            return Err(NapError::shape("parameters do not match model configuration"));
        }
        Ok(Self { config, params })
    }

    fn embed(&self, tokens: &[u32], table: &EmbeddingTable) -> Result<ReviewMatrix> {
        if table.dim() != self.config.dim {
            return Err(NapError::shape(format!(
                "embedding table has width {}, model expects {}",
                table.dim(),
                self.config.dim
            )));
        }
        embed_review(tokens, table, self.config.max_len)
    }

    fn encode(&self, tokens: &[u32], table: &EmbeddingTable) -> Result<Encoded> {
        let x = self.embed(tokens, table)?;
        let (maps, h) = encoder::encode(&x, &self.params.conv)?;
        Ok(Encoded { x, maps, h })
    }

    fn forward(&self, ex: &Example, table: &EmbeddingTable) -> Result<Forward> {
        let cfg = &self.config;
        let gamma = cfg.effective_gamma();
        let m = cfg.kernels;
        let target = if gamma > 0.0 {
            Some(self.encode(&ex.target, table)?)
        } else {
            None
        };
        let mut neighbors = Vec::new();
        let mut context = None;
        let mut c_values: Option<Vec<f64>> = None;
        if gamma < 1.0 {
            match &ex.context {
                ContextSource::Noise(v) => {
                    if v.len() != m {
                        return Err(NapError::shape("noise context has wrong width"));
                    }
                    c_values = Some(v.clone());
                }
                ContextSource::Neighbors(list) => {
                    if list.len() != cfg.k {
                        return Err(NapError::shape(format!(
                            "example {} has {} neighbors, model expects K={}",
                            ex.id,
                            list.len(),
                            cfg.k
                        )));
                    }
                    for tokens in list {
                        neighbors.push(self.encode(tokens, table)?);
                    }
                    let rows: Vec<f64> =
                        neighbors.iter().flat_map(|e| e.h.values.iter().copied()).collect();
                    let cmat = ContextMatrix::new(cfg.k, m, rows)?;
                    let emb = self.params.weighting.apply(&cmat, cfg.neighbor_scheme)?;
                    c_values = Some(emb.values.clone());
                    context = Some((cmat, emb));
                }
            }
        }
        let mut combined = vec![0.0; m];
        if let Some(t) = &target {
            for (o, &h) in combined.iter_mut().zip(&t.h.values) {
                *o = gamma * h;
            }
        }
        if let Some(c) = &c_values {
            for (o, &v) in combined.iter_mut().zip(c) {
                *o += (1.0 - gamma) * v;
            }
        }
        if ex.extra.len() != cfg.extra_features {
            return Err(NapError::shape(format!(
                "example {} has {} extra features, model expects {}",
                ex.id,
                ex.extra.len(),
                cfg.extra_features
            )));
        }
        let w = &self.params.out_weights;
        let logit = self.params.out_bias
            + combined.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
            + ex.extra.iter().zip(&w[m..]).map(|(a, b)| a * b).sum::<f64>();
        Ok(Forward {
            target,
            neighbors,
            context,
            combined,
            prob: sigmoid(logit),
        })
    }

    fn backward(&self, ex: &Example, fwd: &Forward, grad_logit: f64, grads: &mut Params) {
        let cfg = &self.config;
        let m = cfg.kernels;
        let gamma = cfg.effective_gamma();
        grads.out_bias += grad_logit;
        for (g, &a) in grads.out_weights.iter_mut().zip(fwd.combined.iter().chain(&ex.extra)) {
            *g += grad_logit * a;
        }
        let grad_combined: Vec<f64> = self.params.out_weights[..m]
            .iter()
            .map(|w| grad_logit * w)
            .collect();
        if let Some(t) = &fwd.target {
            let grad_h: Vec<f64> = grad_combined.iter().map(|g| gamma * g).collect();
            encoder::backward(&t.x, &t.maps, &t.h, &grad_h, &mut grads.conv);
        }
        if let Some((cmat, emb)) = &fwd.context {
            let grad_c: Vec<f64> = grad_combined.iter().map(|g| (1.0 - gamma) * g).collect();
            let mut grad_rows = vec![0.0; cfg.k * m];
            context::backward(
                cmat,
                &self.params.weighting,
                cfg.neighbor_scheme,
                emb,
                &grad_c,
                &mut grad_rows,
                &mut grads.weighting,
            );
            for (i, n) in fwd.neighbors.iter().enumerate() {
                encoder::backward(&n.x, &n.maps, &n.h, &grad_rows[i * m..(i + 1) * m], &mut grads.conv);
            }
        }
    }

    /// Probability that the example is helpful.
    pub fn predict(&self, ex: &Example, table: &EmbeddingTable) -> Result<f64> {
        Ok(self.forward(ex, table)?.prob)
    }

    /// The combined embedding fed to the output layer (review part only).
    pub fn combined_embedding(&self, ex: &Example, table: &EmbeddingTable) -> Result<Vec<f64>> {
        Ok(self.forward(ex, table)?.combined)
    }

    /// Context embedding with its attention record, if the model builds one
    /// from neighbors for this example.
    pub fn context_embedding(
        &self,
        ex: &Example,
        table: &EmbeddingTable,
    ) -> Result<Option<ContextEmbedding>> {
        Ok(self.forward(ex, table)?.context.map(|(_, e)| e))
    }

    /// Full objective on `examples`: mean cross-entropy plus the kernel
    /// penalty. Returns `(loss, cross_entropy)`.
    pub fn loss(&self, examples: &[Example], table: &EmbeddingTable) -> Result<(f64, f64)> {
        let probs = examples
            .iter()
            .map(|ex| self.predict(ex, table))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<HelpfulnessLabel> = examples.iter().map(|e| e.label).collect();
        let ce = cross_entropy(&probs, &labels)?;
        Ok((ce + self.penalty(), ce))
    }

    fn penalty(&self) -> f64 {
        0.5 * self.config.weight_decay * self.params.conv.squared_norm()
    }

    /// Loss and its gradient with respect to every trainable tensor.
    pub fn loss_and_gradient(
        &self,
        examples: &[Example],
        table: &EmbeddingTable,
    ) -> Result<(f64, f64, Params)> {
        if examples.is_empty() {
            return Err(NapError::data("cannot compute a loss over zero examples"));
        }
        let inv_m = 1.0 / examples.len() as f64;
        let mut grads = self.params.zeros_like();
        let mut ce = 0.0;
        for ex in examples {
            let fwd = self.forward(ex, table)?;
            let y = ex.label.as_f64();
            ce += example_cross_entropy(fwd.prob, y);
            // d(CE)/d(logit); clipping only matters beyond |logit| ~ 27
            self.backward(ex, &fwd, (fwd.prob - y) * inv_m, &mut grads);
        }
        let ce = ce * inv_m;
        let lambda = self.config.weight_decay;
        for (g, w) in grads.conv.weights.iter_mut().zip(&self.params.conv.weights) {
            *g += lambda * w;
        }
        Ok((ce + self.penalty(), ce, grads))
    }
}

struct Encoded {
    x: ReviewMatrix,
    maps: FeatureMaps,
    h: ReviewEmbedding,
}

struct Forward {
    target: Option<Encoded>,
    neighbors: Vec<Encoded>,
    context: Option<(ContextMatrix, ContextEmbedding)>,
    combined: Vec<f64>,
    prob: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `h_hat = gamma * h + (1 - gamma) * c`.
pub fn contextualize(h: &[f64], c: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(NapError::config(format!("gamma must be in [0, 1], got {gamma}")));
    }
    if h.len() != c.len() {
        return Err(NapError::shape("review and context embeddings differ in width"));
    }
    Ok(h.iter().zip(c).map(|(a, b)| gamma * a + (1.0 - gamma) * b).collect())
}

/// Logistic output layer.
pub fn predict_probability(combined: &[f64], weights: &[f64], bias: f64) -> Result<f64> {
    if combined.len() != weights.len() {
        return Err(NapError::shape("output weights do not match embedding width"));
    }
    Ok(sigmoid(combined.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias))
}

fn example_cross_entropy(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy with probabilities clipped to `[1e-12, 1-1e-12]`.
pub fn cross_entropy(probs: &[f64], labels: &[HelpfulnessLabel]) -> Result<f64> {
    if probs.is_empty() {
        return Err(NapError::data("cannot compute a loss over zero examples"));
    }
    if probs.len() != labels.len() {
        return Err(NapError::shape("predictions and labels differ in length"));
    }
    let sum: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, y)| example_cross_entropy(p, y.as_f64()))
        .sum();
    Ok(sum / probs.len() as f64)
}

/// Cross-entropy plus `lambda/2 * ||W_c||^2`.
pub fn regularized_loss(
    probs: &[f64],
    labels: &[HelpfulnessLabel],
    conv_weights: &[f64],
    weight_decay: f64,
) -> Result<f64> {
    let sq: f64 = conv_weights.iter().map(|w| w * w).sum();
    Ok(cross_entropy(probs, labels)? + 0.5 * weight_decay * sq)
}
