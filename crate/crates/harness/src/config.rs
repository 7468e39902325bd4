//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 0                      # split shuffle and forest RNG
//! pqs = ["strain", "pitch"]     # default: all seven
//!
//! [labels]
//! clips = "clips.csv"           # manifest
//! ratings = "ratings.csv"       # expert (and optionally non-expert) ratings
//! audio_root = "."              # default: the manifest's directory
//!
//! [features]
//! sets = ["compare-lite"]       # compare-lite | ema | hubert-l7
//! normalize = true              # RMS-normalize audio before compare-lite
//! [features.tables]             # precomputed tables; required for ema, hubert-l7
//! ema = "ema.csv"
//!
//! [split]
//! train = 0.6
//! val = 0.2
//! test = 0.2
//!
//! [grid]
//! n_trees = [100, 300]
//! max_depth = [10, 20]
//! min_samples_leaf = [1, 2, 5]
//! mtry = ["sqrt", "third"]
//!
//! [model]
//! ridge_l2 = 1.0
//!
//! [output]
//! dir = "out"
//!
//! [serve]
//! host = "127.0.0.1"
//! port = 8080
//! log = "annotations.jsonl"
//! anchors = "anchors.csv"
//! redundancy = 6
//! expiry_minutes = 30
//! static_dir = "web"
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voqual_core::{PerceptualQuality, SplitRatios};
use voqual_dsp::FeatureSetId;
use voqual_forest::{Grid, Mtry};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_pqs")]
    pub pqs: Vec<PerceptualQuality>,
    #[serde(default)]
    pub labels: LabelsConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub serve: ServeConfig,
    /// Directory relative paths resolve against; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn all_pqs() -> Vec<PerceptualQuality> {
    PerceptualQuality::ALL.to_vec()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsConfig {
    pub clips: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub audio_root: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    #[serde(default = "default_sets")]
    pub sets: Vec<FeatureSetId>,
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default)]
    pub tables: BTreeMap<FeatureSetId, PathBuf>,
}

fn default_sets() -> Vec<FeatureSetId> {
    vec![FeatureSetId::CompareLite]
}

fn yes() -> bool {
    true
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        Self {
            sets: default_sets(),
            normalize: true,
            tables: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub mtry: Vec<String>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = Grid::default();
        Self {
            n_trees: g.n_trees,
            max_depth: g.max_depth,
            min_samples_leaf: g.min_samples_leaf,
            mtry: g.mtry.iter().map(Mtry::to_string).collect(),
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<Grid> {
        let mtry = self
            .mtry
            .iter()
            .map(|m| m.parse::<Mtry>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let grid = Grid {
            n_trees: self.n_trees.clone(),
            max_depth: self.max_depth.clone(),
            min_samples_leaf: self.min_samples_leaf.clone(),
            mtry,
        };
        if grid.is_empty() {
            return Err(HarnessError::Input("hyperparameter grid is empty".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_l2")]
    pub ridge_l2: f64,
}

fn default_l2() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { ridge_l2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeConfig {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_log")]
    pub log: PathBuf,
    pub anchors: Option<PathBuf>,
    #[serde(default = "default_redundancy")]
    pub redundancy: usize,
    #[serde(default = "default_expiry")]
    pub expiry_minutes: i64,
    pub static_dir: Option<PathBuf>,
}

fn default_host() -> String {
    "127.0.0.1".into()
}
fn default_port() -> u16 {
    8080
}
fn default_log() -> PathBuf {
    PathBuf::from("annotations.jsonl")
}
fn default_redundancy() -> usize {
    voqual_annot::DEFAULT_REDUNDANCY
}
fn default_expiry() -> i64 {
    voqual_annot::DEFAULT_EXPIRY_MINUTES
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            host: default_host(),
            port: default_port(),
            log: default_log(),
            anchors: None,
            redundancy: default_redundancy(),
            expiry_minutes: default_expiry(),
            static_dir: None,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            pqs: all_pqs(),
            labels: LabelsConfig::default(),
            features: FeaturesConfig::default(),
            split: SplitRatios::default(),
            grid: GridConfig::default(),
            model: ModelConfig::default(),
            output: OutputConfig::default(),
            serve: ServeConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> std::result::Result<Self, String> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|message| HarnessError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `p` made absolute against the config's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn clips_path(&self) -> Result<PathBuf> {
        self.labels
            .clips
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| HarnessError::Input("no clip manifest configured (labels.clips / --clips)".into()))
    }

    pub fn ratings_path(&self) -> Result<PathBuf> {
        self.labels
            .ratings
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| HarnessError::Input("no ratings table configured (labels.ratings / --ratings)".into()))
    }

    /// Base directory for clip audio paths.
    pub fn audio_root(&self) -> Result<PathBuf> {
        match &self.labels.audio_root {
            Some(p) => Ok(self.resolve(p)),
            None => Ok(self
                .clips_path()?
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."))),
        }
    }

    pub fn table_path(&self, set: FeatureSetId) -> Option<PathBuf> {
        self.features.tables.get(&set).map(|p| self.resolve(p))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    /// Checks the invariants that do not need the file system.
    pub fn validate(&self) -> Result<()> {
        if self.features.sets.is_empty() {
            return Err(HarnessError::Input("at least one feature set is required".into()));
        }
        if self.pqs.is_empty() {
            return Err(HarnessError::Input("at least one perceptual quality is required".into()));
        }
        self.split.validate()?;
        self.grid.to_grid()?;
        if !(self.model.ridge_l2.is_finite() && self.model.ridge_l2 >= 0.0) {
            return Err(HarnessError::Input("model.ridge_l2 must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Checks that every referenced input exists.
    pub fn check_paths(&self) -> Result<()> {
        let mut paths = vec![self.clips_path()?, self.ratings_path()?];
        for set in &self.features.sets {
            match self.table_path(*set) {
                Some(p) => paths.push(p),
                None if *set != FeatureSetId::CompareLite => {
                    return Err(HarnessError::Input(format!(
                        "feature set {set} needs a precomputed table (features.tables.{set})"
                    )))
                }
                None => {}
            }
        }
        for p in paths {
            if !p.exists() {
                return Err(HarnessError::Labels(voqual_core::Error::MissingFile(p)));
            }
        }
        Ok(())
    }
}
