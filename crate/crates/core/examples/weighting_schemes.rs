//! The four ways of merging K neighbor embeddings into one context vector,
//! applied to a small hand-made neighbor matrix.
//!
//! ```text
//! cargo run --example weighting_schemes
//! ```

use nap::context::{spatial_cumsum, Attention, ContextMatrix, NeighborScheme, WeightingParams};

fn show(name: &str, params: &WeightingParams, c: &ContextMatrix, neighbors: NeighborScheme) -> nap::Result<()> {
    let emb = params.apply(c, neighbors)?;
    let values: Vec<String> = emb.values.iter().map(|v| format!("{v:+.3}")).collect();
    println!("{name:<5} c = [{}]  ({} parameters)", values.join(", "), params.parameter_count());
    match &emb.attention {
        Attention::Uniform(k) => println!("      each neighbor weighs 1/{k}"),
        Attention::Rows(alpha) => {
            let a: Vec<String> = alpha.iter().map(|v| format!("{v:.3}")).collect();
            println!("      alpha = [{}]", a.join(", "));
        }
        Attention::Features { k, m, beta } => {
            for i in 0..*k {
                let row: Vec<String> = beta[i * m..(i + 1) * m].iter().map(|v| format!("{v:.3}")).collect();
                println!("      beta[{i}] = [{}]", row.join(", "));
            }
        }
    }
    Ok(())
}

fn main() -> nap::Result<()> {
    // four neighbors (two before, two after the target), three features
    let c = ContextMatrix::from_rows(&[
        vec![0.9, 0.1, 0.0],
        vec![0.7, 0.3, 0.2],
        vec![0.1, 0.8, 0.5],
        vec![0.0, 0.6, 0.9],
    ])?;
    let s = NeighborScheme::Surrounding;
    show("AVG", &WeightingParams::Avg, &c, s)?;
    show("WAVG", &WeightingParams::Wavg { query: vec![2.0, -1.0, 0.5] }, &c, s)?;
    let weights = vec![
        1.5, 0.0, -0.5, //
        0.5, 0.0, 0.0, //
        -0.5, 1.0, 0.0, //
        -1.0, 0.5, 1.5,
    ];
    show("FR", &WeightingParams::Fr { weights: weights.clone() }, &c, s)?;
    show("SFR", &WeightingParams::Sfr { weights }, &c, s)?;

    println!("\ncumulative sums used by SFR for a surrounding window:");
    let cum = spatial_cumsum(&c, s);
    for i in 0..cum.k() {
        println!("  row {i}: {:?}", cum.row(i));
    }
    Ok(())
}
