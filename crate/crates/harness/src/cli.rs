//! The `voqual` command line.
//!
//! Every subcommand accepts `--config <file>`, `--seed <n>` and
//! `--out <dir>`; flags override the matching config keys. Failures print a
//! single `error[<class>]: <message>` line and exit 1; usage errors exit 2.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use voqual_core::split::make_split;
use voqual_core::{AgreementReport, PerceptualQuality, RaterClass, RatingRecord, SplitRatios};
use voqual_dsp::{FeatureSetId, FeatureVector};
use voqual_forest::{tune, Grid, Hyperparams, MeanBaseline, Mtry, RandomForestModel};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{self, compare_config, load_labels, model_file, prepare_pair, rmse, PairData};
use crate::extract::{feature_table, features_csv};
use crate::output::write_atomic;
use crate::scatter::report_scatter;
use crate::synth;
use crate::targets::expert_targets;

#[derive(Debug, Parser)]
#[command(name = "voqual", version, about = "Perceptual voice quality toolkit")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for splits and forests.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a clip manifest and ratings table and print a summary.
    Ingest(IngestArgs),
    /// Compute or load a feature table for every clip.
    Extract(ExtractArgs),
    /// Write a seeded train/val/test split of the manifest's clips.
    Split(SplitArgs),
    /// Fit one forest on the train partition with fixed hyperparameters.
    Train(TrainArgs),
    /// Grid-search hyperparameters on the validation partition.
    Tune(PairArgs),
    /// Score a saved model on one partition.
    Evaluate(EvaluateArgs),
    /// Rater agreement table (ICC for experts, Pearson r for non-experts).
    Agreement(AgreementArgs),
    /// Expert vs non-expert clip means, one CSV per quality.
    Scatter(ScatterArgs),
    /// Run the annotation service.
    Serve(ServeArgs),
    /// Run the full experiment and write every report.
    Run(RunArgs),
    /// Write the synthetic mini-corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Clip manifest CSV.
    #[arg(long, value_name = "PATH")]
    pub clips: Option<PathBuf>,
    /// Ratings CSV.
    #[arg(long, value_name = "PATH")]
    pub ratings: Option<PathBuf>,
    /// Base directory for relative audio paths.
    #[arg(long, value_name = "DIR")]
    pub audio_root: Option<PathBuf>,
    /// Precomputed feature table for the chosen set.
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Skip RMS normalization before compare-lite extraction.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Keep valid rows and report rejected ones instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, default_value = "compare-lite")]
    pub set: FeatureSetId,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Train, val and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, value_name = "T,V,T")]
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub pq: PerceptualQuality,
    #[arg(long, default_value = "compare-lite")]
    pub set: FeatureSetId,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, default_value_t = 300)]
    pub n_trees: usize,
    #[arg(long, default_value_t = 20)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 2)]
    pub min_samples_leaf: usize,
    /// sqrt, third, all or a count.
    #[arg(long, default_value = "sqrt")]
    pub mtry: Mtry,
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model file written by `train` or `run`.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "test")]
    pub partition: PartitionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Expert,
    Nonexpert,
    All,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// Ratings CSV.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub class: ClassArg,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Ratings CSV with expert and non-expert rows.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    /// Qualities to report (default: all with overlap).
    #[arg(long, value_delimiter = ',')]
    pub pq: Vec<PerceptualQuality>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Anchor examples CSV (14 rows).
    #[arg(long, value_name = "PATH")]
    pub anchors: Option<PathBuf>,
    /// Ratings log (JSON lines).
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    /// Listen address (default 127.0.0.1).
    #[arg(long)]
    pub host: Option<String>,
    /// Listen port (default 8080).
    #[arg(long)]
    pub port: Option<u16>,
    /// Ratings wanted per clip (default 6).
    #[arg(long)]
    pub redundancy: Option<usize>,
    /// Minutes before an unanswered assignment lapses (default 30).
    #[arg(long)]
    pub expiry_minutes: Option<i64>,
    /// Rater UI build directory.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',')]
    pub pq: Vec<PerceptualQuality>,
    #[arg(long, value_delimiter = ',')]
    pub set: Vec<FeatureSetId>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of clips.
    #[arg(long, default_value_t = synth::DEFAULT_CLIPS)]
    pub clips: usize,
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

/// Config from `--config` (or defaults) with global flags applied.
pub fn base_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig {
            base_dir: absolute(Path::new(".")),
            ..Default::default()
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = absolute(out);
    }
    Ok(cfg)
}

fn apply_data(cfg: &mut ExperimentConfig, data: &DataArgs, set: Option<FeatureSetId>) {
    if let Some(p) = &data.clips {
        cfg.labels.clips = Some(absolute(p));
    }
    if let Some(p) = &data.ratings {
        cfg.labels.ratings = Some(absolute(p));
    }
    if let Some(p) = &data.audio_root {
        cfg.labels.audio_root = Some(absolute(p));
    }
    if data.no_normalize {
        cfg.features.normalize = false;
    }
    if let (Some(p), Some(set)) = (&data.features, set) {
        cfg.features.tables.insert(set, absolute(p));
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    print_text(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"))
}

/// A closed stdout (e.g. piped into `head`) is not an error.
fn print_text(text: &str) -> Result<()> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarnessError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn features_for(cfg: &ExperimentConfig, set: FeatureSetId) -> Result<BTreeMap<String, FeatureVector>> {
    let table = cfg.table_path(set);
    if let Some(t) = &table {
        if !t.exists() {
            return Err(voqual_core::Error::MissingFile(t.clone()).into());
        }
    }
    let clips = match table {
        Some(_) => Vec::new(),
        None => voqual_core::labels::read_clips_file(&cfg.clips_path()?)?,
    };
    feature_table(set, table.as_deref(), &clips, &cfg.audio_root()?, &compare_config(cfg))
}

fn pair_data(cfg: &ExperimentConfig, set: FeatureSetId, pq: PerceptualQuality) -> Result<PairData> {
    let labels = load_labels(cfg)?;
    let features = features_for(cfg, set)?;
    let targets = expert_targets(labels.ratings(), pq);
    prepare_pair(set, pq, &features, &targets, cfg.seed, cfg.split)
}

fn ratings_arg(cfg: &ExperimentConfig, labels: &Option<PathBuf>) -> Result<Vec<RatingRecord>> {
    let path = match labels {
        Some(p) => absolute(p),
        None => cfg.ratings_path()?,
    };
    Ok(voqual_core::labels::read_ratings_file(&path)?)
}

#[derive(Serialize)]
struct IngestSummary {
    clips: usize,
    ratings: usize,
    expert_ratings: usize,
    nonexpert_ratings: usize,
    rejected_rows: usize,
    coverage: BTreeMap<String, BTreeMap<PerceptualQuality, usize>>,
}

fn cmd_ingest(cfg: ExperimentConfig, a: &IngestArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, None);
    let (clips, ratings) = (cfg.clips_path()?, cfg.ratings_path()?);
    let (labels, diags) = if a.lenient {
        voqual_core::labels::ingest_labels_lenient(&clips, &ratings)?
    } else {
        (voqual_core::labels::ingest_labels(&clips, &ratings)?, Vec::new())
    };
    for d in &diags {
        log::warn!("{d}");
    }
    let count = |c| labels.ratings().iter().filter(|r| r.rater_class == c).count();
    let mut coverage = BTreeMap::new();
    for class in [RaterClass::Expert, RaterClass::NonExpert] {
        let per: BTreeMap<PerceptualQuality, usize> =
            PerceptualQuality::ALL.iter().map(|q| (*q, labels.coverage(class, *q))).collect();
        coverage.insert(class.to_string(), per);
    }
    print_json(&IngestSummary {
        clips: labels.clips().len(),
        ratings: labels.ratings().len(),
        expert_ratings: count(RaterClass::Expert),
        nonexpert_ratings: count(RaterClass::NonExpert),
        rejected_rows: diags.len(),
        coverage,
    })
}

fn cmd_extract(cfg: ExperimentConfig, a: &ExtractArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, Some(a.set));
    let table = features_for(&cfg, a.set)?;
    let path = cfg.out_dir().join("features").join(format!("{}.csv", a.set));
    write_atomic(&path, &features_csv(&table)?)?;
    print_text(&format!("{}\n", path.display()))
}

fn cmd_split(cfg: ExperimentConfig, a: &SplitArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, None);
    if let Some(r) = &a.ratios {
        cfg.split = SplitRatios {
            train: r[0],
            val: r[1],
            test: r[2],
        };
    }
    let clips = voqual_core::labels::read_clips_file(&cfg.clips_path()?)?;
    let ids: Vec<String> = clips.into_iter().map(|c| c.clip_id).collect();
    let split = make_split(&ids, cfg.seed, cfg.split)?;
    let mut buf = Vec::new();
    split.write_csv(&mut buf)?;
    let path = cfg.out_dir().join("split.csv");
    write_atomic(&path, &buf)?;
    let (tr, va, te) = split.sizes();
    print_text(&format!("{} train={tr} val={va} test={te}\n", path.display()))
}

#[derive(Serialize)]
struct TrainSummary {
    model: String,
    feature_set: FeatureSetId,
    pq: PerceptualQuality,
    n_train: usize,
    train_rmse: f64,
    params: Hyperparams,
}

fn cmd_train(cfg: ExperimentConfig, a: &TrainArgs) -> Result<()> {
    let mut cfg = cfg;
    let p = &a.pair;
    apply_data(&mut cfg, &p.data, Some(p.set));
    let data = pair_data(&cfg, p.set, p.pq)?;
    let params = Hyperparams {
        n_trees: a.n_trees,
        max_depth: a.max_depth,
        min_samples_leaf: a.min_samples_leaf,
        mtry: a.mtry,
        seed: cfg.seed,
        bootstrap: !a.no_bootstrap,
    };
    let model = RandomForestModel::fit(&data.train.x, &data.train.y, &params, p.set, p.pq, data.feature_names)?;
    let pred = model.forest.predict_matrix(&data.train.x)?;
    let path = model_file(&cfg.out_dir(), p.set, p.pq);
    write_atomic(&path, model.to_json()?.as_bytes())?;
    print_json(&TrainSummary {
        model: path.display().to_string(),
        feature_set: p.set,
        pq: p.pq,
        n_train: data.train.y.len(),
        train_rmse: rmse(&pred, &data.train.y),
        params,
    })
}

fn cmd_tune(cfg: ExperimentConfig, a: &PairArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, Some(a.set));
    let data = pair_data(&cfg, a.set, a.pq)?;
    let grid: Grid = cfg.grid.to_grid()?;
    let result = tune(&data.train.x, &data.train.y, &data.val.x, &data.val.y, &grid, cfg.seed)?;
    let path = cfg.out_dir().join("tune").join(format!("{}__{}.json", a.set, a.pq));
    let text = serde_json::to_string_pretty(&result).expect("serializable") + "\n";
    write_atomic(&path, text.as_bytes())?;
    print_json(&result.best)
}

#[derive(Serialize)]
struct Evaluation {
    feature_set: FeatureSetId,
    pq: PerceptualQuality,
    partition: String,
    n: usize,
    rmse: f64,
    baseline_rmse: f64,
    predictions: Vec<(String, f64, f64)>,
}

fn cmd_evaluate(cfg: ExperimentConfig, a: &EvaluateArgs) -> Result<()> {
    let model = RandomForestModel::load(&absolute(&a.model))?;
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, Some(model.feature_set));
    let data = pair_data(&cfg, model.feature_set, model.target_pq)?;
    let parts: Vec<&experiment::PartitionData> = match a.partition {
        PartitionArg::Train => vec![&data.train],
        PartitionArg::Val => vec![&data.val],
        PartitionArg::Test => vec![&data.test],
        PartitionArg::All => vec![&data.train, &data.val, &data.test],
    };
    let mut predictions = Vec::new();
    for part in parts {
        for (i, clip) in part.clip_ids.iter().enumerate() {
            predictions.push((clip.clone(), part.y[i], model.predict_row(part.x.row(i))?));
        }
    }
    if predictions.is_empty() {
        return Err(HarnessError::Input("the chosen partition is empty".into()));
    }
    let y: Vec<f64> = predictions.iter().map(|p| p.1).collect();
    let pred: Vec<f64> = predictions.iter().map(|p| p.2).collect();
    let base = MeanBaseline::fit(&data.train.y)?.predict();
    print_json(&Evaluation {
        feature_set: model.feature_set,
        pq: model.target_pq,
        partition: format!("{:?}", a.partition).to_lowercase(),
        n: y.len(),
        rmse: rmse(&pred, &y),
        baseline_rmse: rmse(&vec![base; y.len()], &y),
        predictions,
    })
}

fn cmd_agreement(cli: &Cli, cfg: ExperimentConfig, a: &AgreementArgs) -> Result<()> {
    let ratings = ratings_arg(&cfg, &a.labels)?;
    let classes: &[RaterClass] = match a.class {
        ClassArg::Expert => &[RaterClass::Expert],
        ClassArg::Nonexpert => &[RaterClass::NonExpert],
        ClassArg::All => &[RaterClass::NonExpert, RaterClass::Expert],
    };
    let report = AgreementReport::compute(&ratings, classes);
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    if cli.out.is_some() {
        let out = cfg.out_dir();
        write_atomic(&out.join("agreement.csv"), &csv)?;
        write_atomic(&out.join("agreement.json"), (report.to_json() + "\n").as_bytes())?;
    }
    if a.json {
        print_text(&(report.to_json() + "\n"))
    } else {
        print_text(&String::from_utf8_lossy(&csv))
    }
}

fn cmd_scatter(cfg: ExperimentConfig, a: &ScatterArgs) -> Result<()> {
    let ratings = ratings_arg(&cfg, &a.labels)?;
    let explicit = !a.pq.is_empty();
    let pqs = if explicit { a.pq.clone() } else { PerceptualQuality::ALL.to_vec() };
    let mut written = 0;
    for pq in pqs {
        match report_scatter(&ratings, pq) {
            Ok(r) => {
                let path = cfg.out_dir().join(r.file_name());
                write_atomic(&path, r.to_csv().as_bytes())?;
                let shown = r.pearson_r.map_or("undefined".to_string(), |v| format!("{v:.4}"));
                print_text(&format!("{} n={} r={shown}\n", path.display(), r.points.len()))?;
                written += 1;
            }
            Err(e) if explicit => return Err(e),
            Err(e) => log::warn!("{e}"),
        }
    }
    if written == 0 {
        return Err(HarnessError::Input("no clips with both expert and non-expert ratings".into()));
    }
    Ok(())
}

fn cmd_serve(cfg: ExperimentConfig, a: &ServeArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, None);
    let s = &mut cfg.serve;
    if let Some(p) = &a.anchors {
        s.anchors = Some(absolute(p));
    }
    if let Some(p) = &a.log {
        s.log = absolute(p);
    }
    if let Some(h) = &a.host {
        s.host = h.clone();
    }
    if let Some(p) = a.port {
        s.port = p;
    }
    if let Some(r) = a.redundancy {
        s.redundancy = r;
    }
    if let Some(m) = a.expiry_minutes {
        s.expiry_minutes = m;
    }
    if let Some(d) = &a.static_dir {
        s.static_dir = Some(absolute(d));
    }
    let clips = voqual_core::labels::read_clips_file(&cfg.clips_path()?)?;
    let expert_ratings = match &cfg.labels.ratings {
        Some(p) => voqual_core::labels::read_ratings_file(&cfg.resolve(p))?,
        None => {
            log::warn!("no expert ratings configured; live agreement will stay empty");
            Vec::new()
        }
    };
    let anchors = voqual_annot::load_anchors_or_warn(cfg.serve.anchors.as_deref().map(|p| cfg.resolve(p)).as_deref())?;
    let corpus = voqual_annot::Corpus {
        clips,
        audio_root: cfg.audio_root()?,
        expert_ratings,
        anchors,
    };
    let mut scfg = voqual_annot::ServiceConfig::new(cfg.resolve(&cfg.serve.log));
    scfg.redundancy = cfg.serve.redundancy;
    scfg.expiry = chrono::Duration::minutes(cfg.serve.expiry_minutes);
    scfg.static_dir = cfg.serve.static_dir.as_deref().map(|p| cfg.resolve(p));
    let svc = voqual_annot::AnnotService::open(corpus, scfg, Arc::new(voqual_annot::SystemClock))?;
    let rep = svc.startup_report();
    log::info!(
        "recovered {} rating(s); {} unreadable line(s)",
        rep.records,
        rep.skipped_lines.len()
    );
    let addr: std::net::SocketAddr = format!("{}:{}", cfg.serve.host, cfg.serve.port)
        .parse()
        .map_err(|e| HarnessError::Input(format!("bad listen address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| HarnessError::io("<runtime>", e))?;
    rt.block_on(async move {
        let listener = voqual_annot::bind(addr).await?;
        voqual_annot::serve(listener, Arc::new(svc)).await
    })?;
    Ok(())
}

fn cmd_run(cfg: ExperimentConfig, a: &RunArgs) -> Result<()> {
    let mut cfg = cfg;
    apply_data(&mut cfg, &a.data, a.set.first().copied().filter(|_| a.set.len() == 1));
    if !a.pq.is_empty() {
        cfg.pqs = a.pq.clone();
    }
    if !a.set.is_empty() {
        cfg.features.sets = a.set.clone();
    }
    let (run, files) = experiment::run_and_write(&cfg)?;
    for r in &run.table.rows {
        if let Some(note) = &r.note {
            log::warn!("{} × {}: {note}", r.feature_set, r.pq);
        }
    }
    print_text(&run.table.to_csv())?;
    log::info!("wrote {} file(s) to {}", files.len(), cfg.out_dir().display());
    Ok(())
}

fn cmd_synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let dir = absolute(cli.out.as_deref().unwrap_or(Path::new("mini-corpus")));
    let corpus = synth::write_mini_corpus(&dir, a.clips, cli.seed.unwrap_or(0))?;
    print_text(&format!("{}\n", corpus.config.display()))
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Command::Synth(a) = &cli.command {
        return cmd_synth(cli, a);
    }
    let cfg = base_config(cli)?;
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(cfg, a),
        Command::Extract(a) => cmd_extract(cfg, a),
        Command::Split(a) => cmd_split(cfg, a),
        Command::Train(a) => cmd_train(cfg, a),
        Command::Tune(a) => cmd_tune(cfg, a),
        Command::Evaluate(a) => cmd_evaluate(cfg, a),
        Command::Agreement(a) => cmd_agreement(cli, cfg, a),
        Command::Scatter(a) => cmd_scatter(cfg, a),
        Command::Serve(a) => cmd_serve(cfg, a),
        Command::Run(a) => cmd_run(cfg, a),
        Command::Synth(_) => unreachable!("handled above"),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.class());
            1
        }
    }
}
