//! Command-line front end: synthetic corpus generation, single training
//! runs, multi-seed and multi-split studies, checkpoint evaluation,
//! bootstrap selection, and result-table reports.
//!
//! Conventions shared by every subcommand:
//! - artifacts land in `--out-dir` (or `$DAGGRU_OUT_DIR`), created on use;
//! - the first stdout line is a JSON banner with the resolved settings;
//! - errors print as a single `error: ...` line on stderr with exit code 1;
//! - given the same inputs and seeds, artifact files are byte-identical.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::corpus::{
    attach_embeddings, generate_synthetic, load_corpus, load_embeddings, load_manifest,
    random_split, save_corpus, standard_split, Corpus, CorpusSplit, SyntheticConfig,
};
use crate::model::{load_model, save_model, CombineVariant, ModelConfig, ModelKind};
use crate::stats::{
    bootstrap_selection, read_ledger, render_csv, render_text, result_table, seed_study,
    split_study, welch_t_test, write_ledger, StudyOutcome,
};
use crate::trainer::{eval_f1, train_run, RunRecord, TrainConfig};

#[derive(Parser)]
#[command(
    name = "daggru",
    version,
    about = "Event-trigger detection with DAG-structured bidirectional GRUs"
)]
struct Cli {
    /// Directory for generated artifacts (corpora, ledgers, checkpoints).
    #[arg(long, global = true, env = "DAGGRU_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for studies; 1 runs fully serially. Results are
    /// identical either way.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dependency-annotated corpus.
    GenSynthetic(GenSyntheticArgs),
    /// Train one model on one split; writes a checkpoint and a ledger row.
    Train(TrainCmdArgs),
    /// Score a saved checkpoint on a corpus partition.
    Evaluate(EvaluateArgs),
    /// Train the same configuration across several seeds on one split.
    SeedStudy(SeedStudyArgs),
    /// Train the same configuration across freshly drawn random splits.
    SplitStudy(SplitStudyArgs),
    /// Bootstrap model selection over a ledger's (dev, test) pairs.
    Bootstrap(BootstrapArgs),
    /// Render per-model result tables from a ledger.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenSyntheticArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    docs: usize,
    #[arg(long, default_value_t = 4)]
    sentences_per_doc: usize,
    #[arg(long, default_value_t = 120)]
    vocab: usize,
    #[arg(long, default_value_t = 5)]
    event_types: usize,
    /// Embedding width attached to every token.
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Fraction of sentences carrying a labeled trigger.
    #[arg(long, default_value_t = 0.5)]
    trigger_rate: f64,
    /// Fraction of trigger sentences whose evidence is dependency-only.
    #[arg(long, default_value_t = 0.5)]
    dep_fraction: f64,
    /// Output corpus file (JSONL), relative to --out-dir.
    #[arg(long, default_value = "corpus.jsonl")]
    out: String,
}

#[derive(Args)]
struct DataArgs {
    /// Corpus file (JSONL).
    #[arg(long)]
    corpus: PathBuf,
    /// Optional TSV word-embedding table to attach (tokens without a row
    /// fall back to the <unk> vector).
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// JSON manifest naming the train/dev/test document ids.
    #[arg(long, conflicts_with_all = ["random_split", "split_seed"])]
    split_manifest: Option<PathBuf>,
    /// Draw a seeded random split with these train,dev,test counts.
    #[arg(long, value_delimiter = ',', value_name = "TRAIN,DEV,TEST")]
    random_split: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    split_seed: u64,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::DagGruAttn)]
    model: ModelChoice,
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    /// Edge-type vector width for the shared combine.
    #[arg(long, default_value_t = 32)]
    edge_dim: usize,
    /// Give every edge type its own combine matrix instead of shared
    /// weights plus edge vectors.
    #[arg(long)]
    per_edge_weights: bool,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    /// DAG recurrence, attention combine.
    DagGruAttn,
    /// DAG recurrence, averaging combine.
    DagGruAvg,
    /// Plain sequential bidirectional GRU baseline.
    Bigru,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 5e-4)]
    lr0: f64,
    /// Halve the learning rate every this many epochs.
    #[arg(long, default_value_t = 5)]
    halve_every: usize,
    #[arg(long, default_value_t = 30)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    /// Epochs without dev-F1 improvement before stopping.
    #[arg(long, default_value_t = 5)]
    patience: usize,
    /// Mini-batch size in sentences.
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct TrainCmdArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Checkpoint file name within --out-dir.
    #[arg(long)]
    checkpoint: Option<String>,
    /// Ledger file name within --out-dir; the run record is appended.
    #[arg(long, default_value = "runs.jsonl")]
    ledger: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Partition {
    Train,
    Dev,
    Test,
    All,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Saved model checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Which partition to score; `all` ignores the split arguments.
    #[arg(long, value_enum, default_value_t = Partition::Test)]
    partition: Partition,
}

#[derive(Args)]
struct SeedStudyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Number of seeds; runs use seeds 1..=N.
    #[arg(long, default_value_t = 20)]
    n_seeds: usize,
    #[arg(long, default_value = "runs.jsonl")]
    ledger: String,
    /// Also save one checkpoint per run.
    #[arg(long)]
    save_checkpoints: bool,
}

#[derive(Args)]
struct SplitStudyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// train,dev,test document counts for every drawn split.
    #[arg(long, value_delimiter = ',', value_name = "TRAIN,DEV,TEST")]
    counts: Vec<usize>,
    /// Number of random splits; split s uses split seed s and training
    /// seed s.
    #[arg(long, default_value_t = 10)]
    n_splits: usize,
    #[arg(long, default_value = "runs.jsonl")]
    ledger: String,
    /// Also save one checkpoint per run.
    #[arg(long)]
    save_checkpoints: bool,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Ledger to read; defaults to runs.jsonl in --out-dir.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Restrict to one model's rows (table name, e.g. dag-gru-attn).
    #[arg(long)]
    model: Option<String>,
    /// Runs drawn per replicate.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Ledger to read; defaults to runs.jsonl in --out-dir.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Also write the table as CSV to this file within --out-dir.
    #[arg(long)]
    csv: Option<String>,
    /// Welch t-test between two models' test F1 samples.
    #[arg(long, value_delimiter = ',', value_name = "MODEL_A,MODEL_B")]
    welch: Option<Vec<String>>,
}

impl ModelArgs {
    fn to_config(&self) -> ModelConfig {
        let (kind, combine) = match self.model {
            ModelChoice::DagGruAttn => (ModelKind::DagGru, CombineVariant::Attention),
            ModelChoice::DagGruAvg => (ModelKind::DagGru, CombineVariant::Average),
            ModelChoice::Bigru => (ModelKind::PlainBigru, CombineVariant::Attention),
        };
        ModelConfig {
            kind,
            hidden: self.hidden,
            edge_dim: self.edge_dim,
            combine,
            per_edge_weights: self.per_edge_weights,
            dropout: self.dropout,
        }
    }
}

impl TrainArgs {
    fn to_config(&self) -> TrainConfig {
        TrainConfig {
            lr0: self.lr0,
            halve_every: self.halve_every,
            max_epochs: self.max_epochs,
            l2: self.l2,
            patience: self.patience,
            batch_size: self.batch_size,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

impl DataArgs {
    /// Load the corpus and attach embeddings if a table was given; returns
    /// the corpus plus a JSON fragment describing what was loaded.
    fn load(&self) -> Result<(Corpus, serde_json::Value)> {
        let mut corpus = load_corpus(&self.corpus)
            .with_context(|| format!("loading corpus {}", self.corpus.display()))?;
        let mut attach = serde_json::Value::Null;
        if let Some(table_path) = &self.embeddings {
            let table = load_embeddings(table_path)
                .with_context(|| format!("loading embeddings {}", table_path.display()))?;
            let report = attach_embeddings(&mut corpus, &table)?;
            attach = json!({
                "attached": report.attached,
                "fallbacks": report.fallbacks,
            });
        }
        let info = json!({
            "corpus": self.corpus.display().to_string(),
            "docs": corpus.n_docs(),
            "tokens": corpus.n_tokens(),
            "embedding_dim": corpus.embedding_dim(),
            "embeddings": attach,
        });
        Ok((corpus, info))
    }
}

impl SplitArgs {
    fn resolve(&self, corpus: &Corpus) -> Result<(CorpusSplit, String)> {
        match (&self.split_manifest, &self.random_split) {
            (Some(path), None) => {
                let manifest = load_manifest(path)
                    .with_context(|| format!("loading split manifest {}", path.display()))?;
                Ok((standard_split(corpus, &manifest)?, "standard".into()))
            }
            (None, Some(counts)) => {
                let counts = triple(counts, "--random-split")?;
                let split = random_split(corpus, self.split_seed, counts)?;
                Ok((split, format!("random-{}", self.split_seed)))
            }
            (None, None) => bail!("one of --split-manifest or --random-split is required"),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }
}

/// Entry point for the binary: parse, run, and fold any error into a
/// single-line stderr message with exit code 1.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', "; "));
            ExitCode::FAILURE
        }
    }
}

fn triple(counts: &[usize], flag: &str) -> Result<(usize, usize, usize)> {
    match counts {
        [train, dev, test] => Ok((*train, *dev, *test)),
        other => bail!("{flag} takes exactly three counts, got {}", other.len()),
    }
}

fn banner(command: &str, cli_out_dir: &Path, jobs: usize, detail: serde_json::Value) {
    println!(
        "{}",
        json!({
            "command": command,
            "out_dir": cli_out_dir.display().to_string(),
            "jobs": jobs,
            "settings": detail,
        })
    );
}

fn dispatch(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating out dir {}", cli.out_dir.display()))?;
    // Studies parallelize with rayon; the pool can only be sized once per
    // process, so a second configuration attempt is ignored.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global();

    match &cli.command {
        Command::GenSynthetic(args) => gen_synthetic(&cli, args),
        Command::Train(args) => train(&cli, args),
        Command::Evaluate(args) => evaluate(&cli, args),
        Command::SeedStudy(args) => seed_study_cmd(&cli, args),
        Command::SplitStudy(args) => split_study_cmd(&cli, args),
        Command::Bootstrap(args) => bootstrap(&cli, args),
        Command::Report(args) => report(&cli, args),
    }
}

fn gen_synthetic(cli: &Cli, args: &GenSyntheticArgs) -> Result<()> {
    let config = SyntheticConfig {
        seed: args.seed,
        n_docs: args.docs,
        sentences_per_doc: args.sentences_per_doc,
        vocab_size: args.vocab,
        n_event_types: args.event_types,
        k: args.k,
        trigger_rate: args.trigger_rate,
        dep_fraction: args.dep_fraction,
    };
    let out = cli.out_dir.join(&args.out);
    banner(
        "gen-synthetic",
        &cli.out_dir,
        cli.jobs,
        json!({
            "seed": args.seed, "docs": args.docs,
            "sentences_per_doc": args.sentences_per_doc,
            "vocab": args.vocab, "event_types": args.event_types,
            "k": args.k, "trigger_rate": args.trigger_rate,
            "dep_fraction": args.dep_fraction,
            "out": out.display().to_string(),
        }),
    );
    let corpus = generate_synthetic(&config)?;
    save_corpus(&corpus, &out)?;
    println!(
        "{}",
        json!({ "written": out.display().to_string(), "docs": corpus.n_docs(), "tokens": corpus.n_tokens() })
    );
    Ok(())
}

fn append_ledger(path: &Path, fresh: &[RunRecord]) -> Result<()> {
    let mut records = if path.exists() {
        read_ledger(path)?
    } else {
        Vec::new()
    };
    records.extend_from_slice(fresh);
    write_ledger(path, &records)?;
    Ok(())
}

fn train(cli: &Cli, args: &TrainCmdArgs) -> Result<()> {
    let model_config = args.model.to_config();
    let train_config = args.train.to_config();
    let (corpus, data_info) = args.data.load()?;
    let (split, split_id) = args.split.resolve(&corpus)?;
    let checkpoint_name = args.checkpoint.clone().unwrap_or_else(|| {
        format!("model-{}-seed{}.json", model_config.table_name(), train_config.seed)
    });
    banner(
        "train",
        &cli.out_dir,
        cli.jobs,
        json!({
            "data": data_info,
            "split_id": split_id,
            "split_sizes": [split.train.len(), split.dev.len(), split.test.len()],
            "model": model_config,
            "train": train_config,
            "checkpoint": checkpoint_name,
            "ledger": args.ledger,
        }),
    );

    let outcome = train_run(&corpus, &split, &split_id, &model_config, &train_config)?;
    save_model(&outcome.model, &cli.out_dir.join(&checkpoint_name))?;
    let mut record = outcome.record;
    record.checkpoint = Some(checkpoint_name);
    append_ledger(&cli.out_dir.join(&args.ledger), std::slice::from_ref(&record))?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    let model = load_model(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let (corpus, data_info) = args.data.load()?;
    let (doc_ids, part_name): (Vec<String>, &str) = match args.partition {
        Partition::All => (corpus.docs.iter().map(|d| d.id.clone()).collect(), "all"),
        part => {
            let (split, _) = args.split.resolve(&corpus)?;
            match part {
                Partition::Train => (split.train, "train"),
                Partition::Dev => (split.dev, "dev"),
                Partition::Test => (split.test, "test"),
                Partition::All => unreachable!(),
            }
        }
    };
    banner(
        "evaluate",
        &cli.out_dir,
        cli.jobs,
        json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "data": data_info,
            "partition": part_name,
            "docs": doc_ids.len(),
        }),
    );
    let f1 = eval_f1(&model, &corpus, &doc_ids)?;
    println!("{}", json!({ "partition": part_name, "micro_f1": f1 }));
    Ok(())
}

fn save_study_artifacts(
    cli: &Cli,
    outcome: StudyOutcome,
    ledger_name: &str,
    save_checkpoints: bool,
) -> Result<()> {
    let mut records = Vec::with_capacity(outcome.runs.len());
    for run in outcome.runs {
        let mut record = run.record;
        if save_checkpoints {
            let name = format!(
                "model-{}-{}-seed{}.json",
                record.model, record.split_id, record.seed
            );
            save_model(&run.model, &cli.out_dir.join(&name))?;
            record.checkpoint = Some(name);
        }
        records.push(record);
    }
    append_ledger(&cli.out_dir.join(ledger_name), &records)?;
    for record in &records {
        println!("{}", serde_json::to_string(record)?);
    }
    if !outcome.diverged.is_empty() {
        println!("{}", json!({ "diverged_seeds": outcome.diverged }));
    }
    Ok(())
}

fn seed_study_cmd(cli: &Cli, args: &SeedStudyArgs) -> Result<()> {
    if args.n_seeds < 2 {
        bail!("--n-seeds must be at least 2; use `train` for a single run");
    }
    let model_config = args.model.to_config();
    let train_config = args.train.to_config();
    let (corpus, data_info) = args.data.load()?;
    let (split, split_id) = args.split.resolve(&corpus)?;
    banner(
        "seed-study",
        &cli.out_dir,
        cli.jobs,
        json!({
            "data": data_info,
            "split_id": split_id,
            "split_sizes": [split.train.len(), split.dev.len(), split.test.len()],
            "model": model_config,
            "train": train_config,
            "n_seeds": args.n_seeds,
            "ledger": args.ledger,
        }),
    );
    let seeds: Vec<u64> = (1..=args.n_seeds as u64).collect();
    let outcome = seed_study(&corpus, &split, &split_id, &model_config, &train_config, &seeds)?;
    save_study_artifacts(cli, outcome, &args.ledger, args.save_checkpoints)
}

fn split_study_cmd(cli: &Cli, args: &SplitStudyArgs) -> Result<()> {
    if args.n_splits == 0 {
        bail!("--n-splits must be at least 1");
    }
    let model_config = args.model.to_config();
    let train_config = args.train.to_config();
    let (corpus, data_info) = args.data.load()?;
    let counts = triple(&args.counts, "--counts")?;
    banner(
        "split-study",
        &cli.out_dir,
        cli.jobs,
        json!({
            "data": data_info,
            "counts": [counts.0, counts.1, counts.2],
            "n_splits": args.n_splits,
            "model": model_config,
            "train": train_config,
            "ledger": args.ledger,
        }),
    );
    let outcome = split_study(&corpus, counts, args.n_splits, &model_config, &train_config)?;
    save_study_artifacts(cli, outcome, &args.ledger, args.save_checkpoints)
}

fn ledger_path(cli: &Cli, explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| cli.out_dir.join("runs.jsonl"))
}

fn bootstrap(cli: &Cli, args: &BootstrapArgs) -> Result<()> {
    let path = ledger_path(cli, &args.ledger);
    let mut records = read_ledger(&path)?;
    if let Some(model) = &args.model {
        records.retain(|r| &r.model == model);
        if records.is_empty() {
            bail!("no ledger rows for model {model} in {}", path.display());
        }
    }
    let pairs: Vec<(f64, f64)> = records.iter().map(|r| (r.dev_f1, r.test_f1)).collect();
    let k = args.k;
    banner(
        "bootstrap",
        &cli.out_dir,
        cli.jobs,
        json!({
            "ledger": path.display().to_string(),
            "model": args.model,
            "rows": pairs.len(),
            "k": k,
            "reps": args.reps,
            "seed": args.seed,
        }),
    );
    let sel = bootstrap_selection(&pairs, k, args.reps, args.seed)?;
    println!(
        "{}",
        json!({
            "mean_test_f1": sel.mean,
            "half_width": sel.half_width,
            "k": sel.k,
            "reps": sel.reps,
        })
    );
    Ok(())
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let path = ledger_path(cli, &args.ledger);
    let records = read_ledger(&path)?;
    if records.is_empty() {
        bail!("ledger {} holds no runs", path.display());
    }
    banner(
        "report",
        &cli.out_dir,
        cli.jobs,
        json!({
            "ledger": path.display().to_string(),
            "rows": records.len(),
            "csv": args.csv,
            "welch": args.welch,
        }),
    );
    let rows = result_table(&records);
    print!("{}", render_text(&rows));
    if let Some(csv_name) = &args.csv {
        let csv_path = cli.out_dir.join(csv_name);
        std::fs::write(&csv_path, render_csv(&rows))
            .with_context(|| format!("writing {}", csv_path.display()))?;
    }
    if let Some(pair) = &args.welch {
        if pair.len() != 2 {
            bail!("--welch takes exactly two model names, got {}", pair.len());
        }
        let sample = |name: &str| -> Result<Vec<f64>> {
            let s: Vec<f64> = records
                .iter()
                .filter(|r| r.model == name)
                .map(|r| r.test_f1)
                .collect();
            if s.is_empty() {
                return Err(anyhow!("no ledger rows for model {name}"));
            }
            Ok(s)
        };
        let (a, b) = (sample(&pair[0])?, sample(&pair[1])?);
        let w = welch_t_test(&a, &b)?;
        println!(
            "{}",
            json!({
                "welch": { "a": pair[0], "b": pair[1], "n_a": a.len(), "n_b": b.len(),
                            "t": w.t, "dof": w.dof, "p": w.p }
            })
        );
    }
    Ok(())
}
