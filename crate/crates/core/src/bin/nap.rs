use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nap::baselines::{write_feature_csv, SentimentLexicon};
use nap::corpus::{
    assemble_dataset, prepare_corpus, read_corpus_jsonl, read_prepared, write_pairs_jsonl,
    write_prepared, Partition,
};
use nap::harness::{
    build_examples, embedding_table, export_attention, export_embeddings,
    generate_synthetic_corpus, mean_accuracy, run_repetitions, run_sweep, Manifest, Settings,
};
use nap::model::{evaluate, Checkpoint, NapModel};
use nap::{NapError, Result};

#[derive(Parser)]
#[command(name = "nap", version, about = "Neighbor-aware review helpfulness prediction")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set k=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, split, encode and pair a review corpus.
    Preprocess,
    /// Train the configured variant for every repetition seed.
    Train,
    /// Score a saved checkpoint on the test partition.
    Evaluate,
    /// Run the hyperparameter grid and search for cheaper settings.
    Sweep,
    /// Write a synthetic corpus and matching word vectors.
    GenSynthetic,
    /// Dump combined embeddings and neighbor attention of test pairs.
    ExportEmbeddings,
    /// Dump the contextual baseline features of every review.
    Features,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Preprocess => "preprocess",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Sweep => "sweep",
            Command::GenSynthetic => "gen-synthetic",
            Command::ExportEmbeddings => "export-embeddings",
            Command::Features => "features",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let overrides = cli
        .overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
                .ok_or_else(|| NapError::config(format!("--set expects KEY=VALUE, got {kv:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let settings = Settings::load(cli.config.as_deref(), &overrides)?;
    if settings.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.threads)
            .build_global()
            .map_err(|e| NapError::config(e.to_string()))?;
    }
    let mut manifest = Manifest::new(cli.command.name(), settings.to_map(), vec![settings.seed]);
    if let Some(path) = &cli.config {
        manifest.add_input(path)?;
    }
    match cli.command {
        Command::Preprocess => preprocess(&settings, &mut manifest)?,
        Command::Train => train(&settings, &mut manifest)?,
        Command::Evaluate => evaluate_checkpoint(&settings, &mut manifest)?,
        Command::Sweep => sweep(&settings, &mut manifest)?,
        Command::GenSynthetic => gen_synthetic(&settings)?,
        Command::ExportEmbeddings => export(&settings, &mut manifest)?,
        Command::Features => features(&settings, &mut manifest)?,
    }
    let dir = match cli.command {
        Command::Preprocess => &settings.data,
        _ => &settings.out,
    };
    manifest.write(&dir.join(format!("manifest-{}.json", cli.command.name())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NapError::io(dir, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| NapError::io(path, e))
}

fn lexicon(settings: &Settings) -> Result<SentimentLexicon> {
    match &settings.lexicon {
        Some(path) => SentimentLexicon::load(path),
        None => Ok(SentimentLexicon::bundled()),
    }
}

fn preprocess(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    let corpus_path = settings
        .corpus
        .as_ref()
        .ok_or_else(|| NapError::config("preprocess needs `corpus`"))?;
    manifest.add_input(corpus_path)?;
    let items = read_corpus_jsonl(corpus_path)?;
    let prepared = prepare_corpus(items, &settings.prepare, &lexicon(settings)?)?;
    create_dir(&settings.data)?;
    write_prepared(&settings.data, &prepared)?;
    let m = &settings.model;
    let split = assemble_dataset(&prepared, m.neighbor_scheme, m.k, settings.seed)?;
    for p in Partition::ALL {
        let path = settings.data.join(format!("pairs-{}.jsonl", p.name()));
        write_pairs_jsonl(&path, split.partition(p))?;
    }
    log::info!(
        "prepared {} items, vocabulary {} terms, pairs train/val/test {}/{}/{}",
        prepared.items.len(),
        prepared.vocab.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    Ok(())
}

fn train(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    manifest.add_input(&settings.data)?;
    let prepared = read_prepared(&settings.data)?;
    let table = embedding_table(&prepared, settings)?;
    let runs = run_repetitions(&prepared, &table, &settings.model, &settings.train)?;
    manifest.seeds = runs.iter().map(|r| r.seed).collect();
    create_dir(&settings.out)?;
    for run in &runs {
        if let Some(model) = &run.model {
            let path = settings.out.join(format!("checkpoint-seed{}.json", run.seed));
            Checkpoint::from_model(model, table.checksum()).save(&path)?;
        }
    }
    write_json(&settings.out.join("results.json"), &runs)?;
    let accs: Vec<String> = runs.iter().map(|r| format!("{:.4}", r.test_accuracy)).collect();
    println!(
        "{} mean test accuracy {:.4} over {} runs [{}]",
        settings.model.variant,
        mean_accuracy(&runs),
        runs.len(),
        accs.join(", ")
    );
    Ok(())
}

fn load_checkpoint(settings: &Settings, manifest: &mut Manifest) -> Result<Option<(NapModel, String)>> {
    let Some(path) = &settings.checkpoint else {
        return Ok(None);
    };
    manifest.add_input(path)?;
    let ckpt = Checkpoint::load(path)?;
    let checksum = ckpt.embedding_checksum.clone();
    Ok(Some((ckpt.into_model()?, checksum)))
}

fn evaluate_checkpoint(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    let (model, checksum) = load_checkpoint(settings, manifest)?
        .ok_or_else(|| NapError::config("evaluate needs `checkpoint`"))?;
    manifest.add_input(&settings.data)?;
    let prepared = read_prepared(&settings.data)?;
    let table = embedding_table(&prepared, &Settings {
        model: model.config.clone(),
        ..settings.clone()
    })?;
    if table.checksum() != checksum {
        return Err(NapError::data(
            "embedding table differs from the one the checkpoint was trained with",
        ));
    }
    let data = build_examples(&prepared, &model.config, settings.seed)?;
    let accuracy = evaluate(&model, &data.test, &table)?;
    create_dir(&settings.out)?;
    write_json(
        &settings.out.join("evaluation.json"),
        &serde_json::json!({
            "variant": model.config.variant,
            "seed": settings.seed,
            "pairs": data.test.len(),
            "test_accuracy": accuracy,
        }),
    )?;
    println!("test accuracy {accuracy:.4} on {} pairs", data.test.len());
    Ok(())
}

fn sweep(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    manifest.add_input(&settings.data)?;
    let prepared = read_prepared(&settings.data)?;
    let table = embedding_table(&prepared, settings)?;
    let report = run_sweep(&prepared, &table, &settings.sweep, &settings.model, &settings.train)?;
    manifest.seeds = (0..settings.train.repetitions as u64)
        .map(|r| settings.train.seed + r)
        .collect();
    create_dir(&settings.out)?;
    report.write_json(&settings.out.join("sweep.json"))?;
    report.write_csv(&settings.out.join("sweep.csv"))?;
    match &report.best {
        Some(best) => println!(
            "best {} ({}) mean accuracy {:.4}; {} comparable alternatives",
            best.cell,
            best.annotation,
            best.mean_accuracy,
            report.alternatives.len()
        ),
        None => println!("no cells evaluated"),
    }
    Ok(())
}

fn gen_synthetic(settings: &Settings) -> Result<()> {
    let corpus = generate_synthetic_corpus(&settings.synthetic)?;
    create_dir(&settings.out)?;
    corpus.write_corpus(&settings.out.join("corpus.jsonl"))?;
    corpus.write_vectors(&settings.out.join("vectors.txt"))?;
    println!(
        "wrote {} reviews and {} word vectors to {}",
        corpus.records.len(),
        corpus.vectors.len(),
        settings.out.display()
    );
    Ok(())
}

fn export(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    manifest.add_input(&settings.data)?;
    let prepared = read_prepared(&settings.data)?;
    let model = match load_checkpoint(settings, manifest)? {
        Some((model, _)) => model,
        None => {
            log::info!("no checkpoint given, exporting a randomly initialized model");
            NapModel::initialize(settings.model.clone(), settings.seed)?
        }
    };
    let table = embedding_table(&prepared, &Settings {
        model: model.config.clone(),
        ..settings.clone()
    })?;
    let data = build_examples(&prepared, &model.config, settings.seed)?;
    create_dir(&settings.out)?;
    export_embeddings(&model, &data.test, &table, &settings.out.join("embeddings.csv"))?;
    export_attention(&model, &data.test, &table, &settings.out.join("attention.csv"))?;
    println!("exported {} test pairs", data.test.len());
    Ok(())
}

fn features(settings: &Settings, manifest: &mut Manifest) -> Result<()> {
    manifest.add_input(&settings.data)?;
    let prepared = read_prepared(&settings.data)?;
    create_dir(&settings.out)?;
    let reviews = Partition::ALL.into_iter().flat_map(|p| prepared.reviews(p));
    write_feature_csv(&settings.out.join("features.csv"), reviews)?;
    Ok(())
}
