//! The per-(feature set, quality) experiment: join features with expert
//! targets, split, tune on validation, refit on train, score on test.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use voqual_core::agreement::AgreementReport;
use voqual_core::split::make_split;
use voqual_core::{
    per_clip_rater_std_for, rater_means, ClipRecord, DatasetSplit, LabelSet, PerceptualQuality,
    RaterClass, RatingRecord, SplitRatios,
};
use voqual_dsp::{CompareLiteConfig, FeatureSetId, FeatureVector};
use voqual_forest::{tune, Grid, Hyperparams, Matrix, MeanBaseline, RandomForestModel, RidgeModel};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::extract::{audio_path, feature_table, features_csv};
use crate::output::{fmt_opt, sha256_bytes, sha256_file, write_atomic};
use crate::scatter::{report_scatter, ScatterReport};
use crate::targets::expert_targets;

/// Feature rows and targets for one partition, in clip id order.
#[derive(Debug, Clone)]
pub struct PartitionData {
    pub clip_ids: Vec<String>,
    pub x: Matrix,
    pub y: Vec<f64>,
}

/// Everything one (feature set, quality) run needs.
#[derive(Debug, Clone)]
pub struct PairData {
    pub set: FeatureSetId,
    pub pq: PerceptualQuality,
    pub feature_names: Vec<String>,
    pub split: DatasetSplit,
    pub train: PartitionData,
    pub val: PartitionData,
    pub test: PartitionData,
}

fn partition(
    ids: &[String],
    features: &BTreeMap<String, FeatureVector>,
    targets: &BTreeMap<String, f64>,
) -> Result<PartitionData> {
    let mut ids = ids.to_vec();
    ids.sort();
    let rows: Vec<Vec<f64>> = ids.iter().map(|c| features[c].values().to_vec()).collect();
    let y = ids.iter().map(|c| targets[c]).collect();
    let x = if rows.is_empty() {
        Matrix::from_flat(Vec::new(), 0, features.values().next().map_or(0, |f| f.len()))?
    } else {
        Matrix::from_rows(&rows)?
    };
    Ok(PartitionData { clip_ids: ids, x, y })
}

/// Joins features with targets and splits the joined clip ids.
/// A join smaller than three clips is an input error.
pub fn prepare_pair(
    set: FeatureSetId,
    pq: PerceptualQuality,
    features: &BTreeMap<String, FeatureVector>,
    targets: &BTreeMap<String, f64>,
    seed: u64,
    ratios: SplitRatios,
) -> Result<PairData> {
    let joined: Vec<String> = targets.keys().filter(|c| features.contains_key(*c)).cloned().collect();
    if joined.len() < 3 {
        return Err(HarnessError::Input(format!(
            "feature/label join for {set} × {pq} has {} clip(s); need at least 3",
            joined.len()
        )));
    }
    let split = make_split(&joined, seed, ratios)?;
    Ok(PairData {
        set,
        pq,
        feature_names: features[&joined[0]].names().to_vec(),
        train: partition(&split.train, features, targets)?,
        val: partition(&split.val, features, targets)?,
        test: partition(&split.test, features, targets)?,
        split,
    })
}

pub fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    voqual_forest::tune::rmse(pred, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub feature_set: FeatureSetId,
    pub pq: PerceptualQuality,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub test_rmse: Option<f64>,
    pub val_rmse: Option<f64>,
    pub baseline_rmse: Option<f64>,
    pub ridge_rmse: Option<f64>,
    pub params: Option<Hyperparams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    /// RMSE of non-expert clip means against the expert targets.
    NonexpertRmse,
    /// Average per-clip standard deviation among experts.
    ExpertStd,
}

impl ReferenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceMethod::NonexpertRmse => "nonexpert_rmse",
            ReferenceMethod::ExpertStd => "expert_std",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub method: ReferenceMethod,
    pub pq: PerceptualQuality,
    pub value: Option<f64>,
    /// Clips that entered the value.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub reference: Vec<ReferenceRow>,
}

impl ResultTable {
    pub fn row(&self, set: FeatureSetId, pq: PerceptualQuality) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.feature_set == set && r.pq == pq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize") + "\n"
    }

    /// Model rows then reference rows. Reference rows carry their method in
    /// `feature_set`, status `reference`, the value in `test_rmse` and the
    /// clip count in `n_test`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "feature_set,pq,status,n_train,n_val,n_test,test_rmse,val_rmse,baseline_rmse,ridge_rmse,n_trees,max_depth,min_samples_leaf,mtry,note\n",
        );
        for r in &self.rows {
            let p = r.params.as_ref();
            let cells = [
                r.feature_set.to_string(),
                r.pq.to_string(),
                match r.status {
                    RowStatus::Ok => "ok".into(),
                    RowStatus::Failed => "failed".into(),
                },
                r.n_train.to_string(),
                r.n_val.to_string(),
                r.n_test.to_string(),
                fmt_opt(r.test_rmse),
                fmt_opt(r.val_rmse),
                fmt_opt(r.baseline_rmse),
                fmt_opt(r.ridge_rmse),
                p.map(|p| p.n_trees.to_string()).unwrap_or_default(),
                p.map(|p| p.max_depth.to_string()).unwrap_or_default(),
                p.map(|p| p.min_samples_leaf.to_string()).unwrap_or_default(),
                p.map(|p| p.mtry.to_string()).unwrap_or_default(),
                csv_field(r.note.as_deref().unwrap_or("")),
            ];
            s += &cells.join(",");
            s.push('\n');
        }
        for r in &self.reference {
            writeln!(
                s,
                "{},{},reference,,,{},{},,,,,,,,",
                r.method.as_str(),
                r.pq,
                r.n,
                fmt_opt(r.value)
            )
            .unwrap();
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// What one pair produced.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub row: ResultRow,
    pub model: Option<RandomForestModel>,
    pub split: Option<DatasetSplit>,
}

fn failed(set: FeatureSetId, pq: PerceptualQuality, note: String, sizes: (usize, usize, usize)) -> PairOutcome {
    PairOutcome {
        row: ResultRow {
            feature_set: set,
            pq,
            status: RowStatus::Failed,
            note: Some(note),
            n_train: sizes.0,
            n_val: sizes.1,
            n_test: sizes.2,
            test_rmse: None,
            val_rmse: None,
            baseline_rmse: None,
            ridge_rmse: None,
            params: None,
        },
        model: None,
        split: None,
    }
}

/// Tunes, refits and scores one pair. Data problems become a failed row.
pub fn run_pair(
    set: FeatureSetId,
    pq: PerceptualQuality,
    features: &BTreeMap<String, FeatureVector>,
    targets: &BTreeMap<String, f64>,
    cfg: &ExperimentConfig,
    grid: &Grid,
) -> PairOutcome {
    let data = match prepare_pair(set, pq, features, targets, cfg.seed, cfg.split) {
        Ok(d) => d,
        Err(e) => return failed(set, pq, e.to_string(), (0, 0, 0)),
    };
    let sizes = data.split.sizes();
    if sizes.1 == 0 || sizes.2 == 0 {
        return failed(set, pq, format!("split {sizes:?} leaves an empty validation or test partition"), sizes);
    }
    let result = (|| -> Result<PairOutcome> {
        let tuned = tune(&data.train.x, &data.train.y, &data.val.x, &data.val.y, grid, cfg.seed)?;
        let model = RandomForestModel::fit(
            &data.train.x,
            &data.train.y,
            &tuned.best,
            set,
            pq,
            data.feature_names.clone(),
        )?;
        let pred = model.forest.predict_matrix(&data.test.x)?;
        let base = MeanBaseline::fit(&data.train.y)?.predict();
        let ridge_rmse = RidgeModel::fit(&data.train.x, &data.train.y, cfg.model.ridge_l2)
            .map(|m| {
                let p: Vec<f64> = data.test.x.rows().map(|r| m.predict(r)).collect();
                rmse(&p, &data.test.y)
            })
            .map_err(|e| log::warn!("ridge reference for {set} × {pq}: {e}"))
            .ok();
        Ok(PairOutcome {
            row: ResultRow {
                feature_set: set,
                pq,
                status: RowStatus::Ok,
                note: None,
                n_train: sizes.0,
                n_val: sizes.1,
                n_test: sizes.2,
                test_rmse: Some(rmse(&pred, &data.test.y)),
                val_rmse: Some(tuned.val_rmse),
                baseline_rmse: Some(rmse(&vec![base; data.test.y.len()], &data.test.y)),
                ridge_rmse,
                params: Some(tuned.best),
            },
            model: Some(model),
            split: Some(data.split.clone()),
        })
    })();
    result.unwrap_or_else(|e| failed(set, pq, e.to_string(), sizes))
}

/// Label-only reference rows for each quality.
pub fn reference_rows(ratings: &[RatingRecord], pqs: &[PerceptualQuality]) -> Vec<ReferenceRow> {
    let mut out = Vec::new();
    for &pq in pqs {
        let (value, n) = match report_scatter(ratings, pq) {
            Ok(s) => (Some(s.rmse), s.points.len()),
            Err(_) => (None, 0),
        };
        out.push(ReferenceRow {
            method: ReferenceMethod::NonexpertRmse,
            pq,
            value,
            n,
        });
        let n_multi = rater_means(ratings, RaterClass::Expert, pq)
            .values()
            .filter(|m| m.len() >= 2)
            .count();
        out.push(ReferenceRow {
            method: ReferenceMethod::ExpertStd,
            pq,
            value: per_clip_rater_std_for(ratings, RaterClass::Expert, pq).ok(),
            n: n_multi,
        });
    }
    out
}

/// A full run held in memory.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub table: ResultTable,
    pub outcomes: Vec<PairOutcome>,
    pub features: BTreeMap<FeatureSetId, BTreeMap<String, FeatureVector>>,
    pub agreement: AgreementReport,
    pub scatters: Vec<ScatterReport>,
}

pub fn load_labels(cfg: &ExperimentConfig) -> Result<LabelSet> {
    let clips = cfg.clips_path()?;
    let ratings = cfg.ratings_path()?;
    voqual_core::labels::ingest_labels(&clips, &ratings)
        .map_err(|e| HarnessError::from(e).context("loading labels"))
}

pub fn compare_config(cfg: &ExperimentConfig) -> CompareLiteConfig {
    CompareLiteConfig {
        normalize: cfg.features.normalize,
        ..Default::default()
    }
}

/// Runs every configured (feature set, quality) pair. Deterministic for a
/// fixed config and fixed inputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    cfg.check_paths()?;
    let labels = load_labels(cfg)?;
    let grid = cfg.grid.to_grid()?;
    let audio_root = cfg.audio_root()?;
    let ccfg = compare_config(cfg);

    let mut features = BTreeMap::new();
    for &set in &cfg.features.sets {
        let table = feature_table(set, cfg.table_path(set).as_deref(), labels.clips(), &audio_root, &ccfg)
            .map_err(|e| e.context(format!("feature set {set}")))?;
        features.insert(set, table);
    }
    let targets: BTreeMap<PerceptualQuality, BTreeMap<String, f64>> = cfg
        .pqs
        .iter()
        .map(|pq| (*pq, expert_targets(labels.ratings(), *pq)))
        .collect();

    let pairs: Vec<(FeatureSetId, PerceptualQuality)> = cfg
        .features
        .sets
        .iter()
        .flat_map(|s| cfg.pqs.iter().map(move |q| (*s, *q)))
        .collect();
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|(set, pq)| {
            log::info!("running {set} × {pq}");
            run_pair(*set, *pq, &features[set], &targets[pq], cfg, &grid)
        })
        .collect();

    let ratings = labels.ratings();
    let scatters = cfg.pqs.iter().filter_map(|pq| report_scatter(ratings, *pq).ok()).collect();
    Ok(ExperimentRun {
        table: ResultTable {
            rows: outcomes.iter().map(|o| o.row.clone()).collect(),
            reference: reference_rows(ratings, &cfg.pqs),
        },
        outcomes,
        features,
        agreement: AgreementReport::compute(ratings, &[RaterClass::NonExpert, RaterClass::Expert]),
        scatters,
    })
}

#[derive(Debug, Clone, Serialize)]
struct InputDigest {
    role: String,
    path: String,
    sha256: String,
}

#[derive(Debug, Clone, Serialize)]
struct OutputDigest {
    file: String,
    sha256: String,
}

#[derive(Debug, Clone, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    split: SplitRatios,
    pqs: &'a [PerceptualQuality],
    feature_sets: &'a [FeatureSetId],
    normalize: bool,
    grid: &'a Grid,
    ridge_l2: f64,
    inputs: Vec<InputDigest>,
    audio_files: usize,
    audio_sha256: String,
    outputs: Vec<OutputDigest>,
}

fn model_stem(set: FeatureSetId, pq: PerceptualQuality) -> String {
    format!("{set}__{pq}")
}

pub fn model_file(out: &Path, set: FeatureSetId, pq: PerceptualQuality) -> PathBuf {
    out.join("models").join(format!("{}.json", model_stem(set, pq)))
}

fn audio_digest(clips: &[ClipRecord], root: &Path) -> Result<String> {
    let mut acc = String::new();
    for c in clips {
        writeln!(acc, "{} {}", c.clip_id, sha256_file(&audio_path(root, c))?).unwrap();
    }
    Ok(sha256_bytes(acc.as_bytes()))
}

/// Writes every artifact of `run` under the configured output directory and
/// returns the relative file names written, manifest last.
pub fn write_outputs(cfg: &ExperimentConfig, run: &ExperimentRun) -> Result<Vec<String>> {
    let out = cfg.out_dir();
    let mut files: Vec<(String, Vec<u8>)> = vec![
        ("results.csv".into(), run.table.to_csv().into_bytes()),
        ("results.json".into(), run.table.to_json().into_bytes()),
        ("agreement.json".into(), (run.agreement.to_json() + "\n").into_bytes()),
    ];
    let mut agreement_csv = Vec::new();
    run.agreement.write_csv(&mut agreement_csv)?;
    files.push(("agreement.csv".into(), agreement_csv));
    for s in &run.scatters {
        files.push((s.file_name(), s.to_csv().into_bytes()));
    }
    for (set, table) in &run.features {
        files.push((format!("features/{set}.csv"), features_csv(table)?));
    }
    for o in &run.outcomes {
        let stem = model_stem(o.row.feature_set, o.row.pq);
        if let Some(m) = &o.model {
            files.push((format!("models/{stem}.json"), m.to_json()?.into_bytes()));
        }
        if let Some(split) = &o.split {
            let mut buf = Vec::new();
            split.write_csv(&mut buf)?;
            files.push((format!("splits/{stem}.csv"), buf));
        }
    }

    let mut inputs = Vec::new();
    let labels = [("clips", &cfg.labels.clips), ("ratings", &cfg.labels.ratings)];
    for (role, p) in labels {
        if let Some(p) = p {
            inputs.push(InputDigest {
                role: role.into(),
                path: p.display().to_string(),
                sha256: sha256_file(&cfg.resolve(p))?,
            });
        }
    }
    for (set, p) in &cfg.features.tables {
        if cfg.features.sets.contains(set) {
            inputs.push(InputDigest {
                role: format!("table:{set}"),
                path: p.display().to_string(),
                sha256: sha256_file(&cfg.resolve(p))?,
            });
        }
    }
    let uses_audio = cfg
        .features
        .sets
        .iter()
        .any(|s| *s == FeatureSetId::CompareLite && cfg.table_path(*s).is_none());
    let (audio_files, audio_sha256) = if uses_audio {
        let clips = voqual_core::labels::read_clips_file(&cfg.clips_path()?)?;
        (clips.len(), audio_digest(&clips, &cfg.audio_root()?)?)
    } else {
        (0, String::new())
    };

    let mut names = Vec::new();
    let mut outputs = Vec::new();
    for (name, bytes) in &files {
        write_atomic(&out.join(name), bytes)?;
        outputs.push(OutputDigest {
            file: name.clone(),
            sha256: sha256_bytes(bytes),
        });
        names.push(name.clone());
    }
    let manifest = RunManifest {
        tool: "voqual",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        split: cfg.split,
        pqs: &cfg.pqs,
        feature_sets: &cfg.features.sets,
        normalize: cfg.features.normalize,
        grid: &cfg.grid.to_grid()?,
        ridge_l2: cfg.model.ridge_l2,
        inputs,
        audio_files,
        audio_sha256,
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_atomic(&out.join("run_manifest.json"), text.as_bytes())?;
    names.push("run_manifest.json".into());
    Ok(names)
}

/// [`run_experiment`] followed by [`write_outputs`].
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(ExperimentRun, Vec<String>)> {
    let run = run_experiment(cfg)?;
    let files = write_outputs(cfg, &run)?;
    Ok((run, files))
}
