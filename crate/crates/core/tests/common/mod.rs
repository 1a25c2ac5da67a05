#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nap::context::{NeighborScheme, WeightingScheme};
use nap::corpus::HelpfulnessLabel;
use nap::embeddings::EmbeddingTable;
use nap::model::{ContextSource, Example, ModelConfig, NapModel, Variant};

pub const VOCAB: usize = 12;

/// A random lookup table with a zero padding row.
pub fn table(dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<f64> = (0..VOCAB * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    rows[..dim].fill(0.0);
    EmbeddingTable::from_rows(dim, rows).unwrap()
}

fn tokens(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(1..VOCAB as u32)).collect()
}

/// `count` examples with reviews of `len` tokens and `k` neighbors each.
pub fn examples(cfg: &ModelConfig, count: usize, len: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let target = tokens(&mut rng, len);
            let context = match cfg.variant {
                Variant::Noise => {
                    ContextSource::Noise((0..cfg.kernels).map(|_| rng.gen_range(0.0..=1.0)).collect())
                }
                _ => ContextSource::Neighbors((0..cfg.k).map(|_| tokens(&mut rng, len)).collect()),
            };
            Example {
                id: format!("x/{i}"),
                label: if i % 2 == 0 { HelpfulnessLabel::Helpful } else { HelpfulnessLabel::Unhelpful },
                target,
                context,
                extra: (0..cfg.extra_features).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            }
        })
        .collect()
}

/// Tiny model shape used by the gradient checks.
pub fn tiny_config(variant: Variant, weighting: WeightingScheme) -> ModelConfig {
    ModelConfig {
        window: 2,
        dim: 4,
        kernels: 3,
        k: 2,
        weighting,
        max_len: 8,
        ..ModelConfig::default().for_variant(variant)
    }
}

pub fn tiny_model(variant: Variant, weighting: WeightingScheme, seed: u64) -> NapModel {
    NapModel::initialize(tiny_config(variant, weighting), seed).unwrap()
}

/// Every variant code with a trainable or fixed context, for sweeps over
/// model kinds in tests.
pub fn all_variants() -> Vec<Variant> {
    let mut v = vec![Variant::Independent, Variant::RandomNeighbors, Variant::Noise];
    for s in NeighborScheme::ALL {
        v.push(Variant::NeighborOnly(s));
        v.push(Variant::Contextual(s));
    }
    v.push("I+ORD_D".parse().unwrap());
    v
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter, with its tensor name.
pub fn max_gradient_error(model: &NapModel, batch: &[Example], table: &EmbeddingTable, step: f64) -> (f64, String) {
    let (_, _, grads) = model.loss_and_gradient(batch, table).unwrap();
    let analytic: Vec<(&'static str, Vec<f64>)> =
        grads.tensors().into_iter().map(|(n, t)| (n, t.to_vec())).collect();
    let mut worst = (0.0f64, String::new());
    for (ti, (name, g)) in analytic.iter().enumerate() {
        for (i, &analytic) in g.iter().enumerate() {
            let mut plus = model.clone();
            plus.params.tensors_mut()[ti][i] += step;
            let mut minus = model.clone();
            minus.params.tensors_mut()[ti][i] -= step;
            let lp = plus.loss(batch, table).unwrap().0;
            let lm = minus.loss(batch, table).unwrap().0;
            let numeric = (lp - lm) / (2.0 * step);
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            if err > worst.0 {
                worst = (err, format!("{name}[{i}]: analytic {analytic} numeric {numeric}"));
            }
        }
    }
    worst
}
