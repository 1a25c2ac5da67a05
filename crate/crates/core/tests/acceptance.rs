//! Acceptance suite. Runs without the libtest harness and prints one line
//! per criterion; the process fails if any criterion fails.

mod common;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nap::baselines::{
    conformity_feature, entropy_feature, item_features, order_feature, polarity_feature, FeatureKind,
    SentimentLexicon,
};
use nap::context::{
    weight_avg, Attention, ContextMatrix, NeighborScheme, WeightingParams, WeightingScheme,
};
use nap::corpus::{prepare_corpus, read_corpus_jsonl, ItemSequence, PrepareConfig, Review};
use nap::embeddings::load_embedding_table;
use nap::harness::{generate_synthetic_corpus, run_once, SyntheticConfig};
use nap::model::{train, ExampleSplit, ModelConfig, NapModel, TrainConfig, Variant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, k: usize, m: usize) -> ContextMatrix {
    ContextMatrix::new(k, m, (0..k * m).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, scheme: WeightingScheme, m: usize, k: usize) -> WeightingParams {
    let mut p = WeightingParams::zeros(scheme, m, k);
    if let Some(v) = p.values_mut() {
        v.iter_mut().for_each(|x| *x = rng.gen_range(-3.0..3.0));
    }
    p
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for scheme in NeighborScheme::ALL {
        for w in WeightingScheme::ALL {
            let cfg = common::tiny_config(Variant::Contextual(scheme), w);
            for seed in 0..2 {
                let model = NapModel::initialize(cfg.clone(), seed).map_err(|e| e.to_string())?;
                let table = common::table(cfg.dim, seed + 100);
                let batch = common::examples(&cfg, 2, 5, seed + 200);
                let (err, at) = common::max_gradient_error(&model, &batch, &table, 1e-4);
                ensure(err <= 1e-4, || format!("{} {w}: rel err {err:e} at {at}", cfg.variant))?;
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} models, max rel err {worst:.1e}, {:.2}s", elapsed.as_secs_f64()))
}

fn reduction_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = rng.gen_range(1..=10);
        let m = rng.gen_range(1..=12);
        let c = random_matrix(&mut rng, k, m);
        let avg = weight_avg(&c).values;
        for scheme in [WeightingScheme::Wavg, WeightingScheme::Fr] {
            let got = WeightingParams::zeros(scheme, m, k)
                .apply(&c, NeighborScheme::Preceding)
                .map_err(|e| e.to_string())?
                .values;
            for (a, b) in got.iter().zip(&avg) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-6, || format!("zero-parameter schemes differ from AVG by {worst:e}"))?;

    for _ in 0..200 {
        let m = rng.gen_range(1..=12);
        let c = random_matrix(&mut rng, 1, m);
        for neighbors in [NeighborScheme::Preceding, NeighborScheme::Following] {
            let mut fr = None;
            for scheme in WeightingScheme::ALL {
                let p = random_params(&mut rng, scheme, m, 1);
                let got = p.apply(&c, neighbors).map_err(|e| e.to_string())?.values;
                ensure(got == c.row(0), || format!("{scheme} with K=1 changed the neighbor row"))?;
                if scheme == WeightingScheme::Fr {
                    fr = Some(p);
                }
            }
            let weights = fr.unwrap().values().unwrap().to_vec();
            let a = WeightingParams::Fr { weights: weights.clone() }.apply(&c, neighbors);
            let b = WeightingParams::Sfr { weights }.apply(&c, neighbors);
            let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
            ensure(a.values == b.values && a.attention == b.attention, || {
                "SFR and FR disagree at K=1".into()
            })?;
        }
    }
    Ok(format!("max deviation from AVG {worst:.1e}; K=1 rows exact"))
}

fn normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for draw in 0..1000 {
        let k = 2 * rng.gen_range(1..=5);
        let m = rng.gen_range(1..=16);
        let c = random_matrix(&mut rng, k, m);
        let neighbors = NeighborScheme::ALL[draw % 3];
        for scheme in [WeightingScheme::Wavg, WeightingScheme::Fr, WeightingScheme::Sfr] {
            let p = random_params(&mut rng, scheme, m, k);
            let emb = p.apply(&c, neighbors).map_err(|e| e.to_string())?;
            match emb.attention {
                Attention::Rows(alpha) => worst = worst.max((alpha.iter().sum::<f64>() - 1.0).abs()),
                Attention::Features { k, m, beta } => {
                    for j in 0..m {
                        let col: f64 = (0..k).map(|i| beta[i * m + j]).sum();
                        worst = worst.max((col - 1.0).abs());
                    }
                }
                Attention::Uniform(_) => return Err(format!("{scheme} reported uniform attention")),
            }
        }
    }
    ensure(worst <= 1e-6, || format!("weights sum off by {worst:e}"))?;
    Ok(format!("1000 draws, max deviation {worst:.1e}"))
}

fn parameter_counts() -> Outcome {
    // (m, K, [AVG, WAVG, FR, SFR])
    let table = [
        (100, 4, [0, 100, 400, 400]),
        (100, 10, [0, 100, 1000, 1000]),
        (3, 2, [0, 3, 6, 6]),
    ];
    for (m, k, expected) in table {
        for (scheme, want) in WeightingScheme::ALL.into_iter().zip(expected) {
            let cfg = ModelConfig {
                kernels: m,
                k,
                weighting: scheme,
                ..ModelConfig::default().for_variant(Variant::Contextual(NeighborScheme::Surrounding))
            };
            let model = NapModel::initialize(cfg, 0).map_err(|e| e.to_string())?;
            let counts = [
                scheme.parameter_count(m, k),
                WeightingParams::zeros(scheme, m, k).parameter_count(),
                model.params.weighting_parameter_count(),
            ];
            ensure(counts.iter().all(|&c| c == want), || {
                format!("{scheme} (m={m}, K={k}): {counts:?}, expected {want}")
            })?;
        }
    }
    Ok("3 shapes x 4 schemes".into())
}

fn variant_equivalence() -> Outcome {
    let independent = ModelConfig {
        dim: 6,
        kernels: 5,
        window: 3,
        k: 4,
        max_len: 16,
        ..ModelConfig::default().for_variant(Variant::Independent)
    };
    let full = ModelConfig {
        gamma: 1.0,
        weighting: WeightingScheme::Fr,
        ..independent.for_variant(Variant::Contextual(NeighborScheme::Surrounding))
    };
    let table = common::table(independent.dim, 11);
    let data = ExampleSplit {
        train: common::examples(&full, 64, 10, 12),
        validation: common::examples(&full, 16, 10, 13),
        test: common::examples(&full, 16, 10, 14),
    };
    let tc = TrainConfig {
        batch_size: 16,
        max_epochs: 5,
        patience: 10,
        ..TrainConfig::default()
    };
    let steps = |cfg: &ModelConfig| -> Result<Vec<f64>, String> {
        let model = NapModel::initialize(cfg.clone(), 5).map_err(|e| e.to_string())?;
        let run = train(model, &data, &tc, &table).map_err(|e| e.to_string())?;
        Ok(run.history.into_iter().flat_map(|r| r.step_losses).collect())
    };
    let (a, b) = (steps(&independent)?, steps(&full)?);
    ensure(a.len() == b.len() && a.len() == 20, || format!("step counts {} vs {}", a.len(), b.len()))?;
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("per-step losses differ by {worst:e}"))?;
    Ok(format!("{} steps, max difference {worst:.1e}", a.len()))
}

fn synthetic_experiment() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let syn = generate_synthetic_corpus(&SyntheticConfig {
        rho: 0.8,
        items: 50,
        reviews_per_item: 120,
        ..SyntheticConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let (corpus, vectors) = (dir.path().join("corpus.jsonl"), dir.path().join("vectors.txt"));
    syn.write_corpus(&corpus).map_err(|e| e.to_string())?;
    syn.write_vectors(&vectors).map_err(|e| e.to_string())?;
    let items = read_corpus_jsonl(&corpus).map_err(|e| e.to_string())?;
    let prepared = prepare_corpus(items, &PrepareConfig::default(), &SentimentLexicon::bundled())
        .map_err(|e| e.to_string())?;
    let table = load_embedding_table(&vectors, &prepared.vocab, 16, 1).map_err(|e| e.to_string())?;
    let base = ModelConfig {
        dim: 16,
        kernels: 16,
        k: 4,
        weighting: WeightingScheme::Avg,
        neighbor_scheme: NeighborScheme::Surrounding,
        gamma: 0.2,
        ..ModelConfig::default()
    };
    let tc = TrainConfig::default();
    let mut means = Vec::new();
    for code in ["I", "I+S", "I+N", "I+R"] {
        let cfg = base.for_variant(code.parse().unwrap());
        let mut total = 0.0;
        for seed in 0..3 {
            total += run_once(&prepared, &table, &cfg, &tc, seed)
                .map_err(|e| e.to_string())?
                .test_accuracy;
        }
        means.push(total / 3.0);
    }
    let (i, s, n, r) = (means[0], means[1], means[2], means[3]);
    let elapsed = start.elapsed();
    let summary = format!(
        "I {i:.4}, I+S {s:.4}, I+N {n:.4}, I+R {r:.4}, {:.0}s",
        elapsed.as_secs_f64()
    );
    ensure(s - i >= 0.05, || format!("I+S gain below 5 points: {summary}"))?;
    ensure(n <= i && r <= i, || format!("a control variant beat I: {summary}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("too slow: {summary}"))?;
    Ok(summary)
}

fn review(position: usize, date: NaiveDate, tokens: &[&str]) -> Review {
    Review {
        item_id: "it".into(),
        review_id: format!("r{position}"),
        position,
        date,
        star_rating: 5,
        helpful_votes: 0,
        raw_text: tokens.join(" "),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
    }
}

fn random_docs(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let n = rng.gen_range(1..=12);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=15);
            (0..len).map(|_| format!("w{}", rng.gen_range(0..30))).collect()
        })
        .collect()
}

fn baseline_oracles() -> Outcome {
    let d = |day| NaiveDate::from_ymd_opt(2020, 1, day).unwrap();
    let reviews = [review(0, d(3), &[]), review(1, d(3), &[]), review(2, d(1), &[])];
    let ord = order_feature(&reviews, FeatureKind::OrdDate).map_err(|e| e.to_string())?;
    ensure(ord == [1.0, 1.0, 1.0 / 3.0], || format!("ORD_D gave {ord:?}"))?;

    let same = vec![vec!["solid", "fast", "shipping", "fast"]; 5];
    let kl = conformity_feature(&same);
    ensure(kl.iter().all(|v| v.abs() <= 1e-9), || format!("identical reviews gave KL {kl:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lexicon = SentimentLexicon::bundled();
    for _ in 0..1000 {
        let docs = random_docs(&mut rng);
        let kl = conformity_feature(&docs);
        ensure(kl.iter().all(|&v| v >= 0.0 && v.is_finite()), || format!("negative KL {kl:?}"))?;

        let unique: HashSet<&String> = docs.iter().flatten().collect();
        let total: f64 = entropy_feature(&docs).iter().sum();
        ensure(total == unique.len() as f64, || {
            format!("ENT sums to {total}, item has {} unique words", unique.len())
        })?;
        let item = ItemSequence::new(
            "it",
            docs.iter()
                .enumerate()
                .map(|(i, t)| {
                    let toks: Vec<&str> = t.iter().map(String::as_str).collect();
                    review(i, d(28) - chrono::Days::new(i as u64), &toks)
                })
                .collect(),
        );
        let total: f64 = item_features(&item, &lexicon).iter().map(|f| f["ent"]).sum();
        ensure(total == unique.len() as f64, || format!("item ENT sums to {total}"))?;
    }

    for docs in [
        vec![vec!["good", "bad", "great"], vec!["bad", "excellent", "fine", "good"]],
        vec![vec!["awful"], vec!["terrible", "box"], vec!["bad"]],
        vec![vec!["plain"], vec!["words", "only"]],
    ] {
        let pol = polarity_feature(&docs, &lexicon);
        ensure(pol.iter().all(|&v| v == 0.0), || format!("shared polarity gave POL {pol:?}"))?;
    }
    Ok("ORD, KL (1000 items), ENT, POL".into())
}

fn nap(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nap"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("nap {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn test_accuracy(path: &Path) -> Result<f64, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let runs: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    runs[0]["test_accuracy"].as_f64().ok_or_else(|| "no test_accuracy".to_string())
}

fn pipeline_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let syn = root.join("syn");
    let s = |p: &Path| p.display().to_string();
    nap(&[
        "gen-synthetic",
        "--set", &format!("out={}", s(&syn)),
        "--set", "synthetic.items=12",
        "--set", "synthetic.reviews_per_item=80",
        "--set", "seed=9",
    ])?;
    let mut accuracies = Vec::new();
    for run in ["a", "b"] {
        let data = root.join(run).join("data");
        let out = root.join(run).join("out");
        let common = [
            format!("corpus={}", s(&syn.join("corpus.jsonl"))),
            format!("embeddings={}", s(&syn.join("vectors.txt"))),
            format!("data={}", s(&data)),
            format!("out={}", s(&out)),
            "seed=5".into(),
            "min_reviews=40".into(),
            "min_month_reviews=1".into(),
            "variant=I+S".into(),
            "k=4".into(),
            "dim=16".into(),
            "kernels=8".into(),
            "max_epochs=4".into(),
            "repetitions=1".into(),
        ];
        for cmd in ["preprocess", "train"] {
            let mut args = vec![cmd.to_string()];
            for kv in &common {
                args.push("--set".into());
                args.push(kv.clone());
            }
            nap(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        accuracies.push(test_accuracy(&out.join("results.json"))?);
    }
    let mut compared = 0;
    let mut names: Vec<_> = fs::read_dir(root.join("a").join("data"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.starts_with("manifest"))
        .collect();
    names.sort();
    for name in &names {
        let a = fs::read(root.join("a").join("data").join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(root.join("b").join("data").join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between runs"))?;
        compared += 1;
    }
    ensure(compared >= 5, || format!("only {compared} dataset files written"))?;
    ensure(accuracies[0] == accuracies[1], || format!("accuracies {accuracies:?}"))?;
    Ok(format!("{compared} identical files, test accuracy {:.4} twice", accuracies[0]))
}

fn overfit() -> Outcome {
    let mut worst = 0.0f64;
    for scheme in NeighborScheme::ALL {
        for w in WeightingScheme::ALL {
            let cfg = ModelConfig {
                window: 3,
                dim: 8,
                kernels: 8,
                k: 2,
                weighting: w,
                max_len: 12,
                ..ModelConfig::default().for_variant(Variant::Contextual(scheme))
            };
            let table = common::table(cfg.dim, 21);
            let pairs = common::examples(&cfg, 8, 8, 22);
            let data = ExampleSplit {
                train: pairs.clone(),
                validation: pairs.clone(),
                test: pairs.clone(),
            };
            let tc = TrainConfig {
                batch_size: 1,
                max_epochs: 500,
                patience: 500,
                ..TrainConfig::default()
            };
            let model = NapModel::initialize(cfg.clone(), 23).map_err(|e| e.to_string())?;
            let run = train(model, &data, &tc, &table).map_err(|e| e.to_string())?;
            let (_, ce) = run.model.unwrap().loss(&pairs, &table).map_err(|e| e.to_string())?;
            ensure(ce < 0.01, || format!("{} {w}: cross-entropy {ce:.4} after 500 epochs", cfg.variant))?;
            worst = worst.max(ce);
        }
    }
    Ok(format!("12 configurations, worst cross-entropy {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("gradient oracle", gradient_oracle),
        ("reduction identities", reduction_identities),
        ("attention normalization", normalization),
        ("parameter counts", parameter_counts),
        ("gamma=1 matches I", variant_equivalence),
        ("synthetic contextual experiment", synthetic_experiment),
        ("baseline oracles", baseline_oracles),
        ("pipeline determinism", pipeline_determinism),
        ("overfit sanity", overfit),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
