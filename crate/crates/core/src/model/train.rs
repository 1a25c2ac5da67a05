use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Example, ExampleSplit, NapModel, Params, Variant};
use crate::context::{NeighborScheme, WeightingScheme};
use crate::embeddings::EmbeddingTable;
use crate::error::{NapError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop after this many epochs without a lower validation loss.
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: 10,
            max_epochs: 100,
            seed: 42,
            repetitions: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(NapError::config("batch_size must be at least 1"));
        }
        if self.patience == 0 {
            return Err(NapError::config("patience must be at least 1"));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(NapError::config("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(NapError::config("Adam moment decays must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Adam with bias-corrected moments, one moment pair per parameter.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    steps: u64,
    first: Params,
    second: Params,
}

impl Adam {
    pub fn new(params: &Params, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            steps: 0,
            first: params.zeros_like(),
            second: params.zeros_like(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        self.steps += 1;
        let t = self.steps as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let (lr, eps) = (self.lr, self.epsilon);

        let grads = grads.tensors();
        let firsts = self.first.tensors_mut();
        let seconds = self.second.tensors_mut();
        for (((p, (_, g)), m), v) in params.tensors_mut().into_iter().zip(grads).zip(firsts).zip(seconds) {
            for j in 0..p.len() {
                m[j] = b1 * m[j] + (1.0 - b1) * g[j];
                v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Full objective of every mini-batch, before its update.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub step_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub variant: Variant,
    pub scheme: WeightingScheme,
    pub neighbor_scheme: NeighborScheme,
    #[serde(rename = "K")]
    pub k: usize,
    pub gamma: f64,
    pub seed: u64,
    pub epochs: usize,
    pub best_epoch: usize,
    pub adam_steps: u64,
    pub test_accuracy: f64,
    pub history: Vec<EpochRecord>,
    /// Parameters with the best validation loss.
    #[serde(skip)]
    pub model: Option<NapModel>,
}

/// Fraction of examples whose thresholded prediction (`>= 0.5` is helpful)
/// matches the label.
pub fn evaluate(model: &NapModel, examples: &[Example], table: &EmbeddingTable) -> Result<f64> {
    if examples.is_empty() {
        return Err(NapError::data("cannot evaluate on an empty set"));
    }
    let mut correct = 0usize;
    for ex in examples {
        let p = model.predict(ex, table)?;
        if (p >= 0.5) == ex.label.is_helpful() {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Mini-batch Adam training with early stopping on validation loss. The
/// parameters with the lowest validation loss are restored and evaluated
/// on the test partition.
pub fn train(
    mut model: NapModel,
    data: &ExampleSplit,
    cfg: &TrainConfig,
    table: &EmbeddingTable,
) -> Result<RunResult> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(NapError::data("empty training set"));
    }
    if data.validation.is_empty() {
        return Err(NapError::data("empty validation set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05ee_dba7_c4e5_u64);
    let mut adam = Adam::new(&model.params, cfg);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, 0usize, model.params.clone());
    let mut stale = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut step_losses = Vec::new();
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| data.train[i].clone()).collect();
            let (loss, _, grads) = model.loss_and_gradient(&batch, table)?;
            if !loss.is_finite() {
                return Err(NapError::Divergence {
                    epoch,
                    message: format!("training loss is {loss}"),
                });
            }
            adam.step(&mut model.params, &grads);
            weighted += loss * batch.len() as f64;
            step_losses.push(loss);
        }
        if !model.params.all_finite() {
            return Err(NapError::Divergence {
                epoch,
                message: "non-finite parameters".into(),
            });
        }
        let (val_loss, _) = model.loss(&data.validation, table)?;
        if !val_loss.is_finite() {
            return Err(NapError::Divergence {
                epoch,
                message: format!("validation loss is {val_loss}"),
            });
        }
        history.push(EpochRecord {
            epoch,
            train_loss: weighted / data.train.len() as f64,
            val_loss,
            step_losses,
        });
        log::debug!("epoch {epoch}: val loss {val_loss:.6}");
        if val_loss < best.0 {
            best = (val_loss, epoch, model.params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let epochs = history.len();
    model.params = best.2;
    let test_accuracy = if data.test.is_empty() {
        f64::NAN
    } else {
        evaluate(&model, &data.test, table)?
    };
    Ok(RunResult {
        variant: model.config.variant,
        scheme: model.config.effective_weighting(),
        neighbor_scheme: model.config.neighbor_scheme,
        k: model.config.k,
        gamma: model.config.effective_gamma(),
        seed: cfg.seed,
        epochs,
        best_epoch: best.1,
        adam_steps: adam.steps(),
        test_accuracy,
        history,
        model: Some(model),
    })
}
