use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nap"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("nap binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = nap(args);
    assert!(
        out.status.success(),
        "nap {args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn every_subcommand_runs_from_one_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let syn = root.join("syn");
    let config = root.join("nap.conf");
    fs::write(
        &config,
        format!(
            "# small run\n\
             corpus = {syn}/corpus.jsonl\n\
             embeddings = {syn}/vectors.txt\n\
             data = {data}\n\
             out = {out}\n\
             seed = 3\n\
             min_reviews = 40\n\
             min_month_reviews = 1\n\
             dim = 16\n\
             kernels = 6\n\
             variant = I+F\n\
             k = 3   # neighbors per target\n\
             weighting = FR\n\
             max_epochs = 3\n\
             repetitions = 2\n\
             synthetic.items = 8\n\
             synthetic.reviews_per_item = 60\n",
            syn = syn.display(),
            data = root.join("data").display(),
            out = root.join("out").display(),
        ),
    )
    .unwrap();
    let c = config.to_str().unwrap();
    let syn_out = format!("out={}", syn.display());

    ok(&["gen-synthetic", "--config", c, "--set", &syn_out]);
    assert!(syn.join("corpus.jsonl").is_file() && syn.join("vectors.txt").is_file());

    ok(&["preprocess", "--config", c]);
    for name in ["vocab.txt", "reviews.jsonl", "pairs-train.jsonl", "pairs-val.jsonl", "pairs-test.jsonl"] {
        assert!(root.join("data").join(name).is_file(), "{name} missing");
    }
    let manifest = json(&root.join("data").join("manifest-preprocess.json"));
    assert_eq!(manifest["command"], "preprocess");

    let stdout = ok(&["train", "--config", c]);
    assert!(stdout.contains("I+F mean test accuracy"), "{stdout}");
    let runs = json(&root.join("out").join("results.json"));
    assert_eq!(runs.as_array().unwrap().len(), 2);
    assert_eq!(runs[1]["seed"], 4);
    let ckpt = root.join("out").join("checkpoint-seed3.json");
    assert!(ckpt.is_file());

    let ckpt_set = format!("checkpoint={}", ckpt.display());
    ok(&["evaluate", "--config", c, "--set", &ckpt_set]);
    let eval = json(&root.join("out").join("evaluation.json"));
    assert_eq!(eval["test_accuracy"], runs[0]["test_accuracy"]);

    ok(&["export-embeddings", "--config", c, "--set", &ckpt_set]);
    let emb = fs::read_to_string(root.join("out").join("embeddings.csv")).unwrap();
    assert!(emb.starts_with("pair_id,label,e0,"));
    let att = fs::read_to_string(root.join("out").join("attention.csv")).unwrap();
    assert!(att.starts_with("pair_id,neighbor_index,weight"));
    assert_eq!(att.lines().count() - 1, 3 * (emb.lines().count() - 1));

    ok(&["features", "--config", c]);
    let features = fs::read_to_string(root.join("out").join("features.csv")).unwrap();
    assert!(features.lines().count() > 1);

    ok(&[
        "sweep", "--config", c,
        "--set", "sweep.k=2..3",
        "--set", "sweep.neighbor_schemes=P",
        "--set", "sweep.weightings=AVG,WAVG",
        "--set", "sweep.gammas=0.5",
        "--set", "sweep.variants=I+P",
        "--set", "repetitions=1",
    ]);
    let report = json(&root.join("out").join("sweep.json"));
    assert!(report["best"].is_object());
    assert!(root.join("out").join("sweep.csv").is_file());
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    assert_eq!(nap(&["train", "--set", "no_such_key=1"]).status.code(), Some(1));
    assert_eq!(nap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nap(&["preprocess"]).status.code(), Some(1), "missing corpus setting");
    assert_eq!(nap(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = format!("corpus={}", dir.path().join("absent.jsonl").display());
    let data = format!("data={}", dir.path().join("data").display());
    assert_eq!(nap(&["preprocess", "--set", &missing, "--set", &data]).status.code(), Some(2));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"item_id\": 1}\n").unwrap();
    let bad = format!("corpus={}", bad.display());
    let out = nap(&["preprocess", "--set", &bad, "--set", &data]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.jsonl:1"));
}
