//! The `neurognn` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::{
    clustering_purity, embedding_matrix, embedding_records, export_embeddings, headline_metric, mean_std, metric_name,
    project_2d, read_embeddings, write_scatter_svg, EvalReport,
};
use crate::graph::{build_neurograph, write_graph_export};
use crate::model::{model_from_bytes, read_checkpoint_parts, save_checkpoint, Ablation, ModelState, Task};
use crate::semantics::{load_taxonomy, BrainTaxonomy, EncoderRegistry, PrecomputedEncoder};
use crate::signal::{
    generate_synthetic_dataset, write_feature_clip, DatasetManifest, FeatureClip, Label, ManifestEntry, SynthConfig,
};
use crate::train::{
    evaluate_clips, run_ablation_suite, stratified_subsample, train, write_metrics_log, LossWeights, TrainConfig,
};

pub const CHECKPOINT_FILE: &str = "checkpoint.ngck";
pub const METRICS_FILE: &str = "metrics.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "neurognn",
    version,
    about = "Multi-context graph neural network for EEG seizure detection and classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic EEG dataset (clips + train/val/test manifests)
    Synth(SynthArgs),
    /// Convert a raw-clip dataset into log-amplitude feature clips
    Preprocess(PreprocessArgs),
    /// Self-supervised forecasting pretraining
    Pretrain(TrainArgs),
    /// Train a detection or classification model
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split
    Evaluate(EvalArgs),
    /// Train the full model and the four ablations; print the comparison table
    Ablate(TrainArgs),
    /// Stratified subsample of a manifest
    Subsample(SubsampleArgs),
    /// Write node features, adjacency and node index of one clip's graph
    ExportGraph(GraphArgs),
    /// Export graph embeddings of one split as JSON lines
    Embed(EmbedArgs),
    /// PCA projection, scatter plot and clustering purity of exported embeddings
    Project(ProjectArgs),
}

#[derive(Debug, Args, Serialize)]
struct DataArg {
    /// Dataset directory holding train.json, val.json and test.json
    #[arg(long, env = "NEUROGNN_DATA_DIR", default_value = "data")]
    data: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// Comma-separated class names (CF, GN, AB, CT, non_seizure)
    #[arg(long, value_delimiter = ',', default_value = "CF,GN,AB,CT,non_seizure")]
    classes: Vec<String>,
    /// Comma-separated clip counts, one per class
    #[arg(long, value_delimiter = ',', default_value = "20,20,5,5,50")]
    counts: Vec<usize>,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(short, long, env = "NEUROGNN_DATA_DIR", default_value = "data")]
    out: PathBuf,
    /// Store preprocessed feature clips instead of raw signal
    #[arg(long)]
    features: bool,
    /// Fraction of clips held out for test, by whole recordings
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Fraction of the remaining clips used for validation
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    /// Consecutive 60 s windows per synthetic recording
    #[arg(long, default_value_t = 4)]
    windows_per_recording: usize,
}

#[derive(Debug, Args, Serialize)]
struct PreprocessArgs {
    #[command(flatten)]
    data: DataArg,
    /// Output directory for the feature dataset
    #[arg(short, long)]
    out: PathBuf,
    /// Accepted for uniformity; preprocessing is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArg,
    /// JSON file mirroring the training configuration; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(short, long, default_value = "runs")]
    out: PathBuf,
    /// detection, classification or pretraining
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// Initial learning rate
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Stop after this many consecutive validation-loss increases
    #[arg(long)]
    patience: Option<usize>,
    /// L2 penalty on weight matrices
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Pretraining MSE weight; the consistency weight is 1 - w_mse
    #[arg(long)]
    w_mse: Option<f64>,
    /// none, no_temporal, no_semantics, no_space or no_meta
    #[arg(long, value_parser = parse_ablation)]
    ablation: Option<Ablation>,
    /// Random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of training clips kept by stratified sampling
    #[arg(long)]
    subsample_ratio: Option<f64>,
    /// BiGRU hidden size per direction (M)
    #[arg(long)]
    hidden_dim: Option<usize>,
    /// Semantic embedding size (K)
    #[arg(long)]
    semantic_dim: Option<usize>,
    /// GCN embedding size (Z)
    #[arg(long)]
    gcn_dim: Option<usize>,
    /// GCN layers including the input projection
    #[arg(long)]
    gcn_layers: Option<usize>,
    /// Attention heads
    #[arg(long)]
    heads: Option<usize>,
    /// Text encoder: fallback or external:<name>
    #[arg(long)]
    encoder: Option<String>,
    /// Taxonomy JSON (defaults to the bundled 10-20 layout)
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Pretraining checkpoint whose encoder and GCN weights initialize the model
    #[arg(long)]
    pretrained: Option<PathBuf>,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Overwrite an existing checkpoint
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArg,
    /// Checkpoint to evaluate
    #[arg(long)]
    checkpoint: PathBuf,
    /// train, val or test
    #[arg(long, default_value = "test")]
    split: String,
    /// Output directory (defaults to the checkpoint's directory)
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Accepted for uniformity; evaluation is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct SubsampleArgs {
    /// Manifest to subsample
    #[arg(long)]
    manifest: PathBuf,
    /// Fraction of each class to keep, in (0, 1]
    #[arg(long)]
    ratio: f64,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output manifest path
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long)]
    checkpoint: PathBuf,
    /// train, val or test
    #[arg(long, default_value = "test")]
    split: String,
    /// Clip to export (defaults to the split's first clip)
    #[arg(long)]
    clip_id: Option<String>,
    /// Output directory
    #[arg(short, long, default_value = "graphs")]
    out: PathBuf,
    /// Accepted for uniformity; graph construction is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct EmbedArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long)]
    checkpoint: PathBuf,
    /// train, val or test
    #[arg(long, default_value = "test")]
    split: String,
    /// Output directory
    #[arg(short, long, default_value = "embeddings")]
    out: PathBuf,
    /// Accepted for uniformity; inference is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct ProjectArgs {
    /// Embeddings file written by `embed`
    #[arg(long)]
    embeddings: PathBuf,
    /// Output directory
    #[arg(short, long, default_value = "projection")]
    out: PathBuf,
    /// Number of k-means clusters for purity
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Cluster-size-weighted purity instead of the unweighted mean
    #[arg(long)]
    purity_weighted: bool,
    /// Seed for k-means++ initialization
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    match s {
        "detection" => Ok(Task::Detection),
        "classification" => Ok(Task::Classification),
        "pretraining" => Ok(Task::Pretraining),
        _ => Err(format!("unknown task `{s}` (detection, classification, pretraining)")),
    }
}

fn parse_ablation(s: &str) -> std::result::Result<Ablation, String> {
    Ablation::parse(s).ok_or_else(|| format!("unknown ablation `{s}`"))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(&a),
        Command::Preprocess(a) => preprocess(&a),
        Command::Pretrain(a) => train_command(&a, Some(Task::Pretraining)),
        Command::Train(a) => train_command(&a, None),
        Command::Evaluate(a) => evaluate(&a),
        Command::Ablate(a) => ablate(&a),
        Command::Subsample(a) => subsample(&a),
        Command::ExportGraph(a) => export_graph(&a),
        Command::Embed(a) => embed(&a),
        Command::Project(a) => project(&a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Resolved-config snapshot written next to a command's outputs.
fn snapshot(dir: &Path, command: &str, args: &impl Serialize, extra: serde_json::Value) -> Result<()> {
    write_json(
        &dir.join(format!("{command}.config.json")),
        &json!({ "command": command, "args": args, "resolved": extra }),
    )
}

fn load_split(data: &Path, split: &str) -> Result<(DatasetManifest, Vec<FeatureClip>)> {
    if !matches!(split, "train" | "val" | "test") {
        return Err(Error::invalid(format!("unknown split `{split}`")));
    }
    let manifest = DatasetManifest::load(&data.join(format!("{split}.json")))?;
    manifest.check_unique_ids()?;
    let clips = manifest.load_features(data)?;
    Ok((manifest, clips))
}

/// Registry holding the fallback encoder plus, for `external:<name>`, the
/// precomputed table at `<data>/encoders/<name>.json`.
pub fn encoder_registry(spec: &str, data: &Path) -> Result<EncoderRegistry> {
    let mut registry = EncoderRegistry::default();
    if let Some(name) = spec.strip_prefix("external:") {
        let path = data.join("encoders").join(format!("{name}.json"));
        registry.register(name, Box::new(PrecomputedEncoder::load(&path)?));
    }
    Ok(registry)
}

/// Loads a checkpoint, resolving its encoder against `data`.
pub fn load_model(path: &Path, data: &Path) -> Result<ModelState> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (header, _) = read_checkpoint_parts(&bytes)?;
    let registry = encoder_registry(&header.model.encoder, data)?;
    Ok(model_from_bytes(&bytes, &registry)?.0)
}

fn synth(a: &SynthArgs) -> Result<()> {
    if a.classes.len() != a.counts.len() {
        return Err(Error::invalid(format!(
            "{} classes but {} counts",
            a.classes.len(),
            a.counts.len()
        )));
    }
    let mut counts = Vec::new();
    for (name, &n) in a.classes.iter().zip(&a.counts) {
        let label = Label::parse(name).ok_or_else(|| Error::invalid(format!("unknown class `{name}`")))?;
        counts.push((label, n));
    }
    let mut config = SynthConfig::new(counts, a.seed);
    config.test_fraction = a.test_fraction;
    config.val_fraction = a.val_fraction;
    config.windows_per_recording = a.windows_per_recording;
    create_dir(&a.out)?;
    let m = generate_synthetic_dataset(&config, &a.out, a.features)?;
    snapshot(&a.out, "synth", a, serde_json::to_value(&config)?)?;
    println!(
        "wrote {} clips to {} (train {}, val {}, test {})",
        m.train.entries.len() + m.val.entries.len() + m.test.entries.len(),
        a.out.display(),
        m.train.entries.len(),
        m.val.entries.len(),
        m.test.entries.len()
    );
    Ok(())
}

fn preprocess(a: &PreprocessArgs) -> Result<()> {
    create_dir(&a.out.join("clips"))?;
    let mut total = 0;
    for split in ["train", "val", "test"] {
        let path = a.data.data.join(format!("{split}.json"));
        if !path.exists() {
            continue;
        }
        let (manifest, clips) = load_split(&a.data.data, split)?;
        let mut entries = Vec::with_capacity(clips.len());
        for (entry, clip) in manifest.entries.iter().zip(&clips) {
            let rel = format!("clips/{}.ngc", entry.clip_id);
            write_feature_clip(&a.out.join(&rel), clip)?;
            entries.push(ManifestEntry {
                path: rel,
                ..entry.clone()
            });
        }
        total += entries.len();
        DatasetManifest { entries, ..manifest }.save(&a.out.join(format!("{split}.json")))?;
    }
    if total == 0 {
        return Err(Error::invalid(format!(
            "no manifests found in {}",
            a.data.data.display()
        )));
    }
    snapshot(&a.out, "preprocess", a, json!({}))?;
    println!("wrote {total} feature clips to {}", a.out.display());
    Ok(())
}

fn resolve_train_config(a: &TrainArgs, forced: Option<Task>) -> Result<TrainConfig> {
    let mut c = match &a.config {
        Some(path) => TrainConfig::load(path)?,
        None => TrainConfig::for_task(forced.or(a.task).unwrap_or(Task::Detection)),
    };
    if let Some(t) = forced.or(a.task) {
        c.task = t;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field.clone() { c.$field = v; } )* };
    }
    set!(
        lr,
        batch_size,
        patience,
        weight_decay,
        ablation,
        seed,
        subsample_ratio,
        hidden_dim,
        semantic_dim,
        gcn_dim,
        gcn_layers,
        heads,
        encoder
    );
    if a.max_epochs.is_some() {
        c.max_epochs = a.max_epochs;
    }
    if let Some(w) = a.w_mse {
        c.loss_weights = LossWeights {
            mse: w,
            consistency: 1.0 - w,
        };
    }
    c.validate()?;
    Ok(c.resolved())
}

fn load_taxonomy_arg(path: &Option<PathBuf>) -> Result<BrainTaxonomy> {
    match path {
        Some(p) => load_taxonomy(p),
        None => Ok(BrainTaxonomy::default_10_20()),
    }
}

fn train_command(a: &TrainArgs, forced: Option<Task>) -> Result<()> {
    let config = resolve_train_config(a, forced)?;
    if a.repeats == 0 {
        return Err(Error::invalid("--repeats must be at least 1"));
    }
    let taxonomy = load_taxonomy_arg(&a.taxonomy)?;
    let registry = encoder_registry(&config.encoder, &a.data.data)?;
    let encoder = registry.resolve(&config.encoder)?;
    let pretrained = a
        .pretrained
        .as_deref()
        .map(|p| load_model(p, &a.data.data))
        .transpose()?;
    let (_, train_clips) = load_split(&a.data.data, "train")?;
    let (_, val_clips) = load_split(&a.data.data, "val")?;

    let mut metrics = Vec::new();
    for r in 0..a.repeats {
        let run_config = TrainConfig {
            seed: config.seed + r as u64,
            ..config.clone()
        };
        let dir = if a.repeats == 1 {
            a.out.clone()
        } else {
            a.out.join(format!("run_{r}"))
        };
        create_dir(&dir)?;
        let ckpt = dir.join(CHECKPOINT_FILE);
        if ckpt.exists() && !a.force {
            return Err(Error::Config(format!(
                "{} exists; pass --force to overwrite",
                ckpt.display()
            )));
        }
        snapshot(
            &dir,
            if forced.is_some() { "pretrain" } else { "train" },
            a,
            serde_json::to_value(&run_config)?,
        )?;
        let outcome = match train(
            &train_clips,
            &val_clips,
            &run_config,
            &taxonomy,
            encoder,
            pretrained.as_ref(),
        ) {
            Ok(o) => o,
            Err(e) => {
                if let Error::NonFiniteLoss { diagnostics, .. } = &e {
                    let path = dir.join("diagnostics.txt");
                    std::fs::write(&path, diagnostics).map_err(|err| Error::io(&path, err))?;
                }
                return Err(e);
            }
        };
        let metrics_path = dir.join(METRICS_FILE);
        let mut file = std::fs::File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
        write_metrics_log(&mut file, &outcome.log)?;
        save_checkpoint(
            &ckpt,
            &outcome.best,
            json!({ "best_epoch": outcome.best_epoch, "train_config": run_config }),
        )?;
        let report = EvalReport::from_predictions(run_config.task, &outcome.val_predictions)?;
        report.save(&dir.join("eval_val.json"))?;
        let value =
            headline_metric(run_config.task, &outcome.val_predictions).unwrap_or(outcome.val_predictions.mean_loss);
        println!(
            "run {}: best epoch {} of {}, val {} {:.4}",
            r + 1,
            outcome.best_epoch,
            outcome.log.len(),
            metric_name(run_config.task),
            value
        );
        metrics.push(value);
    }
    if a.repeats > 1 {
        let (mean, std) = mean_std(&metrics);
        write_json(
            &a.out.join("repeats.json"),
            &json!({ "metric": metric_name(config.task), "values": metrics, "mean": mean, "std": std }),
        )?;
        println!(
            "{}: {mean:.4} ± {std:.4} over {} runs",
            metric_name(config.task),
            a.repeats
        );
    }
    Ok(())
}

fn evaluate(a: &EvalArgs) -> Result<()> {
    let state = load_model(&a.checkpoint, &a.data.data)?;
    let (_, clips) = load_split(&a.data.data, &a.split)?;
    let config = TrainConfig::for_task(state.config.task);
    let preds = evaluate_clips(&state, &clips, &config)?;
    let report = EvalReport::from_predictions(state.config.task, &preds)?;
    let dir = a
        .out
        .clone()
        .unwrap_or_else(|| a.checkpoint.parent().map(Path::to_path_buf).unwrap_or_default());
    create_dir(&dir)?;
    report.save(&dir.join(format!("eval_{}.json", a.split)))?;
    snapshot(&dir, "evaluate", a, json!({ "model": state.config }))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn ablate(a: &TrainArgs) -> Result<()> {
    let config = resolve_train_config(a, None)?;
    let taxonomy = load_taxonomy_arg(&a.taxonomy)?;
    let registry = encoder_registry(&config.encoder, &a.data.data)?;
    let encoder = registry.resolve(&config.encoder)?;
    let pretrained = a
        .pretrained
        .as_deref()
        .map(|p| load_model(p, &a.data.data))
        .transpose()?;
    let (_, train_clips) = load_split(&a.data.data, "train")?;
    let (_, val_clips) = load_split(&a.data.data, "val")?;
    let test_clips = if a.data.data.join("test.json").exists() {
        load_split(&a.data.data, "test")?.1
    } else {
        Vec::new()
    };
    create_dir(&a.out)?;
    snapshot(&a.out, "ablate", a, serde_json::to_value(&config)?)?;
    let report = run_ablation_suite(
        &train_clips,
        &val_clips,
        &test_clips,
        &config,
        &taxonomy,
        encoder,
        pretrained.as_ref(),
    )?;
    write_json(&a.out.join("ablation.json"), &report)?;
    let table = report.to_table();
    std::fs::write(a.out.join("ablation.txt"), &table).map_err(|e| Error::io(a.out.join("ablation.txt"), e))?;
    print!("{table}");
    Ok(())
}

fn subsample(a: &SubsampleArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let out = stratified_subsample(&manifest, a.ratio, a.seed)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    out.save(&a.out)?;
    let stem = a.out.file_stem().and_then(|s| s.to_str()).unwrap_or("subsample");
    let dir = a.out.parent().unwrap_or(Path::new("."));
    snapshot(
        dir,
        &format!("{stem}.subsample"),
        a,
        json!({ "class_counts": out.class_counts() }),
    )?;
    for (label, n) in out.class_counts() {
        println!("{:<12} {n}", label.name());
    }
    Ok(())
}

fn export_graph(a: &GraphArgs) -> Result<()> {
    let state = load_model(&a.checkpoint, &a.data.data)?;
    let (_, clips) = load_split(&a.data.data, &a.split)?;
    let clip = match &a.clip_id {
        Some(id) => clips
            .iter()
            .find(|c| &c.clip_id == id)
            .ok_or_else(|| Error::invalid(format!("clip `{id}` not in the {} split", a.split)))?,
        None => clips
            .first()
            .ok_or_else(|| Error::invalid(format!("{} split is empty", a.split)))?,
    };
    let graph = build_neurograph(clip, &state)?;
    create_dir(&a.out)?;
    let (json_path, bin_path) = write_graph_export(&a.out, &graph)?;
    snapshot(&a.out, "export-graph", a, json!({ "clip_id": clip.clip_id }))?;
    println!("wrote {} and {}", json_path.display(), bin_path.display());
    Ok(())
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let state = load_model(&a.checkpoint, &a.data.data)?;
    let (_, clips) = load_split(&a.data.data, &a.split)?;
    let config = TrainConfig::for_task(state.config.task);
    let preds = evaluate_clips(&state, &clips, &config)?;
    create_dir(&a.out)?;
    let path = a.out.join(format!("embeddings_{}.jsonl", a.split));
    let records = embedding_records(&preds);
    export_embeddings(&path, &records)?;
    snapshot(&a.out, "embed", a, json!({ "records": records.len() }))?;
    println!("wrote {} embeddings to {}", records.len(), path.display());
    Ok(())
}

fn project(a: &ProjectArgs) -> Result<()> {
    let records = read_embeddings(&a.embeddings)?;
    let (matrix, labels) = embedding_matrix(&records)?;
    let projection = project_2d(&matrix)?;
    create_dir(&a.out)?;
    write_scatter_svg(
        &a.out.join("projection.svg"),
        &projection.coords,
        &labels,
        "Graph embeddings (PCA)",
    )?;
    let coords: Vec<serde_json::Value> = records
        .iter()
        .zip(projection.coords.rows())
        .map(|(r, xy)| json!({ "clip_id": r.clip_id, "label": r.label, "x": xy[0], "y": xy[1] }))
        .collect();
    write_json(
        &a.out.join("projection.json"),
        &json!({ "variances": projection.variances, "points": coords }),
    )?;
    let codes: Vec<usize> = labels.iter().map(|l| l.code() as usize).collect();
    let purity = clustering_purity(&matrix, &codes, a.k, a.seed, a.purity_weighted)?;
    write_json(
        &a.out.join("purity.json"),
        &json!({ "k": a.k, "weighted": a.purity_weighted, "purity": purity, "n": records.len() }),
    )?;
    snapshot(&a.out, "project", a, json!({}))?;
    println!(
        "purity (k = {}, {}): {purity:.4}",
        a.k,
        if a.purity_weighted { "weighted" } else { "unweighted" }
    );
    Ok(())
}
