mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use testlens::dataset::{ingest_csv, write_records_csv, IngestOptions, RawDataset};
use testlens::java::extract::extract_from_paths;
use testlens::ml::{evaluate_all, predict, train, TrainedModel};
use testlens::model::{EffectivenessLabel, MetricId};
use testlens::pipeline::{self, run_pipeline, Stage};
use testlens::ranking::rank_features;
use testlens::report::{self, sha256_hex, write_atomic, Bundle, Manifest};
use testlens::stats::{correlation_table, Population};
use testlens::Error;

use config::Config;

const EXIT_INPUT: u8 = 2;
const EXIT_LABELING: u8 = 3;
const EXIT_TRAINING: u8 = 4;
const EXIT_SCHEMA: u8 = 5;

struct Failure {
    code: u8,
    messages: Vec<String>,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            messages: vec![message.to_string()],
        }
    }

    fn input(e: impl ToString) -> Self {
        Failure::new(EXIT_INPUT, e)
    }

    fn stage(stage: Stage, e: Error) -> Self {
        let code = match stage {
            Stage::Input => EXIT_INPUT,
            Stage::Labeling => EXIT_LABELING,
            Stage::Training => EXIT_TRAINING,
        };
        Failure::new(code, e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::input(e)
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "testlens",
    version,
    about = "Static code and test metrics, mutation-score labeling, and test effectiveness analysis"
)]
struct Cli {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Metrics CSV.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated feature names, e.g. LOC,WMC.
    #[arg(long)]
    features: Option<String>,
    /// dt, rf or mlp; comma-separated where several are allowed.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Minimum |rho| reported in the filtered correlation table.
    #[arg(long)]
    threshold: Option<f64>,
    /// raw or labeled.
    #[arg(long)]
    population: Option<String>,
    /// Labeling thresholds `q1,q3` replacing the computed quartiles.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute metrics for paired Java classes.
    Extract {
        /// Source directories (repeatable).
        #[arg(long, num_args = 1..)]
        src: Vec<PathBuf>,
        /// Class files, directories or jars (repeatable).
        #[arg(long, num_args = 1..)]
        classes: Vec<PathBuf>,
        /// `class,test` pairing file replacing the naming convention.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label records by mutation-score quartiles.
    Label(Common),
    /// Spearman correlation of every feature with M.
    Correlate(Common),
    /// Train one classifier and save it.
    Train(Common),
    /// Cross-validate classifiers.
    Evaluate(Common),
    /// Rank features with all four algorithms.
    Rank(Common),
    /// Score rows with a saved model.
    Predict(Common),
    /// Correlate, evaluate and rank in one run.
    Pipeline(Common),
}

fn merge(config: &mut Config, c: Common) {
    config.set("seed", c.seed.map(|v| v.to_string()));
    config.set("dataset", c.dataset.map(|p| p.display().to_string()));
    config.set("out", c.out.map(|p| p.display().to_string()));
    config.set("features", c.features);
    config.set("classifier", c.classifier);
    config.set("k", c.k.map(|v| v.to_string()));
    config.set("threshold", c.threshold.map(|v| v.to_string()));
    config.set("population", c.population);
    config.set("thresholds", c.thresholds);
    config.set("model", c.model.map(|p| p.display().to_string()));
}

/// Bytes, hash and parsed form of the dataset file.
fn load_dataset(config: &Config, options: &IngestOptions) -> Result<(RawDataset, String), Failure> {
    let path = config.require_path("dataset")?;
    let bytes = std::fs::read(&path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = ingest_csv(&bytes[..], &name, options)?;
    Ok((data, sha256_hex(&bytes)))
}

fn analysis_dataset(config: &Config) -> Result<(RawDataset, String), Failure> {
    load_dataset(config, &IngestOptions::analysis(config.require_nbi()?))
}

fn out_dir(config: &Config) -> Result<PathBuf, Failure> {
    Ok(config.require_path("out")?)
}

fn write_bundle(bundle: &Bundle, dir: &Path) -> CmdResult {
    for path in bundle.write_to(dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_extract(
    src: Vec<PathBuf>,
    classes: Vec<PathBuf>,
    pairs: Option<PathBuf>,
    out: Option<PathBuf>,
    config: &Config,
) -> CmdResult {
    let src = if src.is_empty() {
        config.list("src").into_iter().map(PathBuf::from).collect()
    } else {
        src
    };
    let classes = if classes.is_empty() {
        config.list("classes").into_iter().map(PathBuf::from).collect()
    } else {
        classes
    };
    let pairs = pairs.or_else(|| config.path("pairs"));
    let out = out.or_else(|| config.path("out"));
    if src.is_empty() {
        return Err(Failure::input("--src is required"));
    }
    let records = extract_from_paths(&src, &classes, pairs.as_deref()).map_err(|errors| Failure {
        code: EXIT_INPUT,
        messages: errors.iter().map(ToString::to_string).collect(),
    })?;
    let mut buf = Vec::new();
    write_records_csv(&mut buf, &records, None)?;
    match out {
        Some(path) => {
            write_atomic(&path, &buf)?;
            eprintln!("{} records written to {}", records.len(), path.display());
        }
        None => std::io::stdout().write_all(&buf).map_err(Failure::input)?,
    }
    Ok(())
}

fn cmd_label(config: &Config) -> CmdResult {
    let (data, _) = analysis_dataset(config)?;
    let labeled = pipeline::label(&data, config.thresholds()?).map_err(|e| Failure::stage(Stage::Labeling, e))?;
    let [non, eff] = labeled.label_counts();
    println!(
        "ingested {} records; q1={} q3={}; labeled {} ({} effective, {} non-effective); discarded {}",
        data.records.len(),
        labeled.q1_threshold,
        labeled.q3_threshold,
        labeled.len(),
        eff,
        non,
        labeled.discarded_count
    );
    if let Some(path) = config.path("out") {
        let (records, labels): (Vec<_>, Vec<_>) = labeled.records.iter().cloned().unzip();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records, Some(&labels))?;
        write_atomic(&path, &buf)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_correlate(config: &Config) -> CmdResult {
    let (data, sha) = analysis_dataset(config)?;
    let population = config.population()?;
    let threshold = config.get("threshold")?.unwrap_or(0.5);
    let records = match population {
        Population::Raw => data.records.clone(),
        Population::Labeled => pipeline::label(&data, config.thresholds()?)
            .map_err(|e| Failure::stage(Stage::Labeling, e))?
            .records
            .into_iter()
            .map(|(r, _)| r)
            .collect(),
    };
    let table = correlation_table(&records, MetricId::MutationScore, threshold, population)?;
    let mut manifest = Manifest::new();
    manifest.push("tool", concat!("testlens ", env!("CARGO_PKG_VERSION")));
    manifest.push("dataset", &data.provenance).push("dataset_sha256", &sha);
    manifest.push("records_ingested", data.records.len());
    manifest
        .push("population", population.as_str())
        .push("population_size", records.len());
    manifest.push("correlation_threshold", threshold);
    let hash = manifest.sha256();
    let mut bundle = Bundle::new(manifest);
    bundle.add("correlations.csv", report::correlations_csv(&table, &hash));
    bundle.add("correlations_full.csv", report::correlations_full_csv(&table, &hash));
    bundle.add("correlations.md", report::correlations_md(&table, &hash));
    for (m, rho) in &table.entries {
        println!("{m}\t{rho:.6}");
    }
    write_bundle(&bundle, &out_dir(config)?)
}

/// Labeled data, manifest prefix and feature matrix shared by train/evaluate/rank.
fn prepare(config: &Config) -> Result<(testlens::model::FeatureMatrix, Manifest), Failure> {
    let (data, sha) = analysis_dataset(config)?;
    let labeled = pipeline::label(&data, config.thresholds()?).map_err(|e| Failure::stage(Stage::Labeling, e))?;
    let features = config.features()?;
    let matrix = pipeline::feature_matrix(&labeled, features.as_deref())?;
    let mut manifest = Manifest::new();
    manifest.push("tool", concat!("testlens ", env!("CARGO_PKG_VERSION")));
    pipeline::describe_data(&mut manifest, &data, &sha, &labeled);
    manifest.push(
        "features",
        matrix
            .feature_ids()
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok((matrix, manifest))
}

fn cmd_train(config: &Config) -> CmdResult {
    let seed = config.seed()?;
    let spec = config.single_classifier()?;
    let model_path = config.require_path("model")?;
    let (matrix, _) = prepare(config)?;
    let model = train(&matrix, &spec, seed).map_err(|e| Failure::stage(Stage::Training, e))?;
    write_atomic(&model_path, model.to_json().as_bytes())?;
    println!(
        "trained {} on {} rows; wrote {}",
        model.kind(),
        matrix.n_rows(),
        model_path.display()
    );
    Ok(())
}

fn cmd_evaluate(config: &Config) -> CmdResult {
    let seed = config.seed()?;
    let specs = config.classifiers()?;
    let k = config.get("k")?.unwrap_or(10);
    let (matrix, mut manifest) = prepare(config)?;
    let eval = evaluate_all(&matrix, &specs, k, seed).map_err(|e| Failure::stage(Stage::Training, e))?;
    manifest
        .push("seed", seed)
        .push("folds", k)
        .push("averaging", "weighted")
        .push("auc", "pooled");
    for spec in &specs {
        manifest.push(format!("classifier.{}", spec.kind()), spec.to_json());
    }
    let hash = manifest.sha256();
    let mut bundle = Bundle::new(manifest);
    bundle.add("classification.csv", report::classification_csv(&eval, &hash));
    bundle.add("classification.md", report::classification_md(&eval, &hash));
    for c in &eval.classifiers {
        println!(
            "{}\taccuracy={:.3}\tf_measure={:.3}\tauc={:.3}",
            c.kind, c.accuracy, c.f_measure, c.auc
        );
    }
    write_bundle(&bundle, &out_dir(config)?)
}

fn cmd_rank(config: &Config) -> CmdResult {
    let (algorithms, top) = config.ranking()?;
    let (matrix, mut manifest) = prepare(config)?;
    let tables = algorithms
        .iter()
        .map(|&a| rank_features(&matrix, a))
        .collect::<Result<Vec<_>, _>>()?;
    manifest.push(
        "ranking",
        algorithms.iter().map(|a| a.short()).collect::<Vec<_>>().join(","),
    );
    manifest.push("ranking_top", top);
    let hash = manifest.sha256();
    let mut bundle = Bundle::new(manifest);
    bundle.add("ranking.csv", report::ranking_csv(&tables, top, &hash));
    bundle.add("ranking.md", report::ranking_md(&tables, top, &hash));
    for t in &tables {
        let top: Vec<_> = t.top(3).map(|m| m.name()).collect();
        println!("{}\t{}", t.algorithm, top.join(","));
    }
    write_bundle(&bundle, &out_dir(config)?)
}

fn cmd_predict(config: &Config) -> CmdResult {
    let model_path = config.require_path("model")?;
    let text =
        std::fs::read_to_string(&model_path).map_err(|e| Failure::input(format!("{}: {e}", model_path.display())))?;
    let model = TrainedModel::from_json(&text)?;
    let (data, _) = load_dataset(config, &IngestOptions::lenient())?;
    let missing: Vec<&str> = model
        .feature_ids
        .iter()
        .filter(|m| !data.columns.contains(m))
        .map(|m| m.name())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::new(
            EXIT_SCHEMA,
            format!("dataset lacks model features: {}", missing.join(", ")),
        ));
    }
    let mut out = String::from("class_id,score,label\n");
    let mut counts = [0usize; 2];
    for r in &data.records {
        let row = model
            .feature_ids
            .iter()
            .map(|&m| {
                r.get(m)
                    .ok_or_else(|| Failure::new(EXIT_SCHEMA, format!("{}: no value for {m}", r.class_id)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let (label, score) = predict(&model, &row)?;
        counts[label.index()] += 1;
        out.push_str(&format!("{},{score},{label}\n", r.class_id));
    }
    let summary = format!(
        "{}: {}, {}: {}",
        EffectivenessLabel::Effective,
        counts[1],
        EffectivenessLabel::NonEffective,
        counts[0]
    );
    match config.path("out") {
        Some(path) => {
            write_atomic(&path, out.as_bytes())?;
            println!("{summary}");
        }
        None => {
            print!("{out}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_pipeline(config: &Config) -> CmdResult {
    let p = config.pipeline()?;
    let dir = out_dir(config)?;
    let (data, sha) = analysis_dataset(config)?;
    let result = run_pipeline(&data, &sha, &p).map_err(|e| Failure::stage(e.stage, e.source))?;
    let m = &result.bundle.manifest;
    println!(
        "ingested {} records; labeled {} (q1={}, q3={})",
        m.get("records_ingested").unwrap_or("?"),
        m.get("records_labeled").unwrap_or("?"),
        m.get("q1").unwrap_or("?"),
        m.get("q3").unwrap_or("?")
    );
    write_bundle(&result.bundle, &dir)
}

fn run(cli: Cli) -> CmdResult {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Extract {
            src,
            classes,
            pairs,
            out,
        } => cmd_extract(src, classes, pairs, out, &config),
        Command::Label(c) => {
            merge(&mut config, c);
            cmd_label(&config)
        }
        Command::Correlate(c) => {
            merge(&mut config, c);
            cmd_correlate(&config)
        }
        Command::Train(c) => {
            merge(&mut config, c);
            cmd_train(&config)
        }
        Command::Evaluate(c) => {
            merge(&mut config, c);
            cmd_evaluate(&config)
        }
        Command::Rank(c) => {
            merge(&mut config, c);
            cmd_rank(&config)
        }
        Command::Predict(c) => {
            merge(&mut config, c);
            cmd_predict(&config)
        }
        Command::Pipeline(c) => {
            merge(&mut config, c);
            cmd_pipeline(&config)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for m in &f.messages {
                eprintln!("error: {m}");
            }
            ExitCode::from(f.code)
        }
    }
}
