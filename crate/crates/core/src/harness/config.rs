use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::Linkage;
use crate::datagen::GenConfig;
use crate::error::{Error, Result};
use crate::forecast::{Architecture, ModelSpec};
use crate::preprocess::ImputeMethod;
use crate::series::{Schema, TARGET_COLUMN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    None,
    Dtw,
    FeatureA,
    FeatureB,
}

impl ClusterMethod {
    pub const ALL: [ClusterMethod; 4] = [
        ClusterMethod::None,
        ClusterMethod::Dtw,
        ClusterMethod::FeatureA,
        ClusterMethod::FeatureB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClusterMethod::None => "none",
            ClusterMethod::Dtw => "dtw",
            ClusterMethod::FeatureA => "feature_a",
            ClusterMethod::FeatureB => "feature_b",
        }
    }
}

impl std::str::FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClusterMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown clustering method {s:?}; expected none, dtw, feature_a or feature_b")))
    }
}

impl std::fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum DataSource {
    Generate(GenConfig),
    /// A dataset directory (or its `dataset.csv`) written by `generate`.
    Path { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanScope {
    /// Every measurement column.
    All,
    /// Only the forecast target.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub clean: bool,
    pub scope: CleanScope,
    pub span: f64,
    pub period: Option<usize>,
    /// Fills missing observations before detection.
    pub impute: ImputeMethod,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            clean: true,
            scope: CleanScope::All,
            span: crate::preprocess::DEFAULT_SPAN,
            period: None,
            impute: ImputeMethod::LinearInterpolation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub methods: Vec<ClusterMethod>,
    pub k_min: usize,
    pub k_max: usize,
    /// Columns used for distances and features; the target when empty.
    pub columns: Vec<String>,
    /// Sakoe-Chiba radius for the DTW path; full DTW when absent.
    pub dtw_radius: Option<usize>,
    pub linkage: Linkage,
    /// Smallest admissible cluster; defaults to the fold count so every
    /// cluster can be cross-validated.
    pub min_cluster_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub hidden: usize,
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default = "one")]
    pub lr_decay: f64,
}

fn one() -> f64 {
    1.0
}

impl TrainingConfig {
    pub fn spec(&self, architecture: Architecture, seed: u64) -> ModelSpec {
        ModelSpec {
            architecture,
            hidden: self.hidden,
            window: self.window,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            lr_decay: self.lr_decay,
        }
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let s = ModelSpec::new(Architecture::M1);
        Self {
            hidden: s.hidden,
            window: s.window,
            learning_rate: s.learning_rate,
            epochs: s.epochs,
            batch_size: s.batch_size,
            lr_decay: s.lr_decay,
        }
    }
}

/// Everything that determines an experiment's numbers, plus where to write
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub data: DataSource,
    pub preprocess: PreprocessConfig,
    pub clustering: ClusteringConfig,
    /// Dynamic input columns.
    pub inputs: Vec<String>,
    pub target: String,
    pub models: Vec<Architecture>,
    /// 1-based indices of the forecast target value.
    pub horizons: Vec<usize>,
    pub n_train: usize,
    pub folds: usize,
    pub seed: u64,
    pub training: TrainingConfig,
    pub out_dir: PathBuf,
    /// Stop with `Interrupted` after this many newly computed cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_after: Option<usize>,
}

impl ExperimentConfig {
    /// Full-scale grid: 400 x 400 data, N = 100, K in {150, 200, 300, 400},
    /// all seven models, all clustering methods.
    pub fn full() -> Self {
        Self {
            name: "full".into(),
            data: DataSource::Generate(GenConfig::full()),
            preprocess: PreprocessConfig::default(),
            clustering: ClusteringConfig {
                methods: ClusterMethod::ALL.to_vec(),
                k_min: 2,
                k_max: 6,
                columns: Vec::new(),
                dtw_radius: None,
                linkage: Linkage::Average,
                min_cluster_size: None,
            },
            inputs: vec![TARGET_COLUMN.into()],
            target: TARGET_COLUMN.into(),
            models: Architecture::ALL.to_vec(),
            horizons: vec![150, 200, 300, 400],
            n_train: 100,
            folds: 5,
            seed: 2021,
            training: TrainingConfig::default(),
            out_dir: PathBuf::from("out"),
            stop_after: None,
        }
    }

    /// Reduced grid that runs in minutes: 100 x 200 data, N = 50,
    /// K in {75, 100}, M1 and M3, no clustering vs feature catalog A.
    pub fn desk() -> Self {
        Self {
            name: "desk".into(),
            data: DataSource::Generate(GenConfig::desk()),
            clustering: ClusteringConfig {
                methods: vec![ClusterMethod::None, ClusterMethod::FeatureA],
                k_max: 4,
                ..Self::full().clustering
            },
            models: vec![Architecture::M1, Architecture::M3],
            horizons: vec![75, 100],
            n_train: 50,
            training: TrainingConfig {
                hidden: 16,
                window: 12,
                learning_rate: 3e-3,
                epochs: 20,
                batch_size: 32,
                lr_decay: 1.0,
            },
            ..Self::full()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(Self::full()),
            "desk" => Ok(Self::desk()),
            other => Err(Error::Config(format!("unknown profile {other:?}; expected full or desk"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    /// Overrides the data and experiment seeds together.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let DataSource::Generate(g) = &mut self.data {
            g.seed = seed;
        }
    }

    pub fn cluster_columns(&self) -> Vec<String> {
        if self.clustering.columns.is_empty() {
            vec![self.target.clone()]
        } else {
            self.clustering.columns.clone()
        }
    }

    pub fn min_cluster_size(&self) -> usize {
        self.clustering.min_cluster_size.unwrap_or(self.folds)
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.models.is_empty() || self.horizons.is_empty() || self.clustering.methods.is_empty() {
            return bad("models, horizons and clustering methods must be non-empty".into());
        }
        if self.inputs.is_empty() {
            return bad("no input columns selected".into());
        }
        if self.folds < 2 {
            return bad("need at least 2 folds".into());
        }
        if let Some(&k) = self.horizons.iter().find(|&&k| k <= self.n_train) {
            return bad(format!("horizon K = {k} must exceed n_train = {}", self.n_train));
        }
        if self.training.window == 0 || self.training.window > self.n_train {
            return bad(format!("window {} must lie in 1..=n_train", self.training.window));
        }
        if self.clustering.k_min < 2 || self.clustering.k_min > self.clustering.k_max {
            return bad("clustering needs 2 <= k_min <= k_max".into());
        }
        if let DataSource::Generate(g) = &self.data {
            g.validate()?;
        }
        Ok(())
    }

    /// Checks against the loaded data.
    pub fn validate_schema(&self, schema: &Schema) -> Result<()> {
        for c in self.inputs.iter().chain([&self.target]).chain(&self.cluster_columns()) {
            if schema.column_index(c).is_err() {
                return Err(Error::Config(format!("column {c:?} is not in the dataset {:?}", schema.columns)));
            }
        }
        if let Some(&k) = self.horizons.iter().find(|&&k| k > schema.length) {
            return Err(Error::Config(format!("horizon K = {k} exceeds series length {}", schema.length)));
        }
        Ok(())
    }

    /// Hash of everything that affects results (output location and
    /// interruption point excluded).
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.stop_after = None;
        c.name.clear();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..12])
    }
}
