//! Compare analytic gradients with central finite differences on a tiny
//! model, for every weighting scheme.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nap::context::{NeighborScheme, WeightingScheme};
use nap::corpus::HelpfulnessLabel;
use nap::embeddings::EmbeddingTable;
use nap::model::{ContextSource, Example, ModelConfig, NapModel, Variant};

const STEP: f64 = 1e-4;

fn main() -> nap::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (vocab, dim) = (10, 4);
    let mut rows: Vec<f64> = (0..vocab * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    rows[..dim].fill(0.0);
    let table = EmbeddingTable::from_rows(dim, rows)?;
    let mut review = |n: usize| -> Vec<u32> { (0..n).map(|_| rng.gen_range(1..vocab as u32)).collect() };
    let batch: Vec<Example> = (0..2)
        .map(|i| Example {
            id: format!("ex{i}"),
            label: if i == 0 { HelpfulnessLabel::Helpful } else { HelpfulnessLabel::Unhelpful },
            target: review(5),
            context: ContextSource::Neighbors((0..4).map(|_| review(5)).collect()),
            extra: vec![],
        })
        .collect();

    for weighting in WeightingScheme::ALL {
        let cfg = ModelConfig {
            window: 2,
            dim,
            kernels: 3,
            k: 4,
            weighting,
            max_len: 8,
            ..ModelConfig::default().for_variant(Variant::Contextual(NeighborScheme::Surrounding))
        };
        let model = NapModel::initialize(cfg, 7)?;
        let (_, _, grads) = model.loss_and_gradient(&batch, &table)?;
        let mut worst = 0.0f64;
        for (t, (name, g)) in grads.tensors().into_iter().enumerate() {
            let mut tensor_worst = 0.0f64;
            for (i, &analytic) in g.iter().enumerate() {
                let mut plus = model.clone();
                plus.params.tensors_mut()[t][i] += STEP;
                let mut minus = model.clone();
                minus.params.tensors_mut()[t][i] -= STEP;
                let numeric = (plus.loss(&batch, &table)?.0 - minus.loss(&batch, &table)?.0) / (2.0 * STEP);
                let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                tensor_worst = tensor_worst.max(err);
            }
            println!("{weighting:<4} {name:<16} {:>3} values, max relative error {tensor_worst:.2e}", g.len());
            worst = worst.max(tensor_worst);
        }
        println!("{weighting:<4} overall {worst:.2e}\n");
    }
    Ok(())
}
