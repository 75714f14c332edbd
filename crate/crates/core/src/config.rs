//! Pipeline configuration (`key = value` files) and seed derivation.
//!
//! Keys are namespaced by stage (`similarity.*`, `cnn.*`, `gbdt.*`,
//! `pipeline.*`). Unknown keys are rejected; missing keys keep their
//! defaults. [`PipelineConfig::to_config_string`] prints every key and loads
//! back to an identical configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::cnn::{NetworkSpec, PoolMode, TrainConfig};
use crate::error::{Error, Result};
use crate::gbdt::GbdtConfig;
use crate::similarity::DEFAULT_DELTA;

/// Convolutional architecture apart from the input width, which is fixed by
/// the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnnArchitecture {
    pub filters: usize,
    pub kernel: (usize, usize),
    pub pool: (usize, usize),
    pub pool_mode: PoolMode,
    pub hidden_units: usize,
}

impl Default for CnnArchitecture {
    fn default() -> Self {
        let spec = NetworkSpec::for_width(0);
        Self {
            filters: spec.filters,
            kernel: spec.kernel,
            pool: spec.pool,
            pool_mode: spec.pool_mode,
            hidden_units: spec.hidden_units,
        }
    }
}

impl CnnArchitecture {
    pub fn spec_for(&self, input_width: usize) -> NetworkSpec {
        NetworkSpec {
            input_height: 2,
            input_width,
            filters: self.filters,
            kernel: self.kernel,
            pool: self.pool,
            pool_mode: self.pool_mode,
            hidden_units: self.hidden_units,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub delta: f64,
    pub gamma_prime_l: f64,
    pub gamma_prime_d: f64,
    pub cnn: CnnArchitecture,
    /// Seeds inside are replaced by [`SeedTree`] derivations at run time.
    pub train: TrainConfig,
    pub gbdt: GbdtConfig,
    pub folds: usize,
    pub master_seed: u64,
    /// Compute similarities and completion from the unmasked matrix
    /// (leaks test labels; for comparison only).
    pub leaky_similarities: bool,
    /// Negative control: permute training labels within each fold.
    pub shuffle_labels: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            gamma_prime_l: 1.0,
            gamma_prime_d: 1.0,
            cnn: CnnArchitecture::default(),
            train: TrainConfig::default(),
            gbdt: GbdtConfig::default(),
            folds: 5,
            master_seed: 42,
            leaky_similarities: false,
            shuffle_labels: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 28] = [
    "similarity.delta",
    "similarity.gamma_prime_l",
    "similarity.gamma_prime_d",
    "cnn.filters",
    "cnn.kernel_height",
    "cnn.kernel_width",
    "cnn.pool_height",
    "cnn.pool_width",
    "cnn.pool",
    "cnn.hidden_units",
    "cnn.learning_rate",
    "cnn.l2",
    "cnn.epochs",
    "cnn.batch_size",
    "gbdt.num_trees",
    "gbdt.max_depth",
    "gbdt.learning_rate",
    "gbdt.lambda",
    "gbdt.min_split_gain",
    "gbdt.min_child_hessian",
    "gbdt.base_score",
    "gbdt.subsample",
    "gbdt.colsample",
    "gbdt.seed",
    "pipeline.folds",
    "pipeline.seed",
    "pipeline.leaky_similarities",
    "pipeline.shuffle_labels",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| Error::InvalidValue {
        key: key.into(),
        message: format!("'{value}': {e}"),
    })
}

impl PipelineConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (key, v) = (key.trim(), value.trim());
        match key {
            "similarity.delta" => self.delta = parse(key, v)?,
            "similarity.gamma_prime_l" => self.gamma_prime_l = parse(key, v)?,
            "similarity.gamma_prime_d" => self.gamma_prime_d = parse(key, v)?,
            "cnn.filters" => self.cnn.filters = parse(key, v)?,
            "cnn.kernel_height" => self.cnn.kernel.0 = parse(key, v)?,
            "cnn.kernel_width" => self.cnn.kernel.1 = parse(key, v)?,
            "cnn.pool_height" => self.cnn.pool.0 = parse(key, v)?,
            "cnn.pool_width" => self.cnn.pool.1 = parse(key, v)?,
            "cnn.pool" => {
                self.cnn.pool_mode = match v {
                    "max" => PoolMode::Max,
                    "mean" => PoolMode::Mean,
                    _ => {
                        return Err(Error::InvalidValue {
                            key: key.into(),
                            message: format!("'{v}' is not 'max' or 'mean'"),
                        })
                    }
                }
            }
            "cnn.hidden_units" => self.cnn.hidden_units = parse(key, v)?,
            "cnn.learning_rate" => self.train.learning_rate = parse(key, v)?,
            "cnn.l2" => self.train.l2 = parse(key, v)?,
            "cnn.epochs" => self.train.epochs = parse(key, v)?,
            "cnn.batch_size" => self.train.batch_size = parse(key, v)?,
            "gbdt.num_trees" => self.gbdt.num_trees = parse(key, v)?,
            "gbdt.max_depth" => self.gbdt.max_depth = parse(key, v)?,
            "gbdt.learning_rate" => self.gbdt.learning_rate = parse(key, v)?,
            "gbdt.lambda" => self.gbdt.lambda = parse(key, v)?,
            "gbdt.min_split_gain" => self.gbdt.min_split_gain = parse(key, v)?,
            "gbdt.min_child_hessian" => self.gbdt.min_child_hessian = parse(key, v)?,
            "gbdt.base_score" => self.gbdt.base_score = parse(key, v)?,
            "gbdt.subsample" => self.gbdt.subsample = parse(key, v)?,
            "gbdt.colsample" => self.gbdt.colsample = parse(key, v)?,
            "gbdt.seed" => self.gbdt.seed = parse(key, v)?,
            "pipeline.folds" => self.folds = parse(key, v)?,
            "pipeline.seed" => self.master_seed = parse(key, v)?,
            "pipeline.leaky_similarities" => self.leaky_similarities = parse(key, v)?,
            "pipeline.shuffle_labels" => self.shuffle_labels = parse(key, v)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |key: &str, message: &str| {
            Err(Error::InvalidValue {
                key: key.into(),
                message: message.into(),
            })
        };
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return invalid("similarity.delta", "must lie in (0, 1]");
        }
        if !(self.gamma_prime_l > 0.0 && self.gamma_prime_l.is_finite()) {
            return invalid("similarity.gamma_prime_l", "must be positive");
        }
        if !(self.gamma_prime_d > 0.0 && self.gamma_prime_d.is_finite()) {
            return invalid("similarity.gamma_prime_d", "must be positive");
        }
        let arch = &self.cnn;
        if arch.filters == 0 || arch.hidden_units == 0 {
            return invalid("cnn.filters", "filters and hidden units must be positive");
        }
        if arch.kernel.0 == 0 || arch.kernel.0 > 2 || arch.kernel.1 == 0 {
            return invalid("cnn.kernel_height", "kernel must be 1-2 rows high and at least 1 wide");
        }
        if arch.pool.0 == 0 || arch.pool.1 == 0 {
            return invalid("cnn.pool_width", "pool window must be positive");
        }
        self.train.validate()?;
        self.gbdt.validate()?;
        if self.folds < 2 {
            return invalid("pipeline.folds", "must be at least 2");
        }
        Ok(())
    }

    /// Every key with its resolved value, one `key = value` line each.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    fn get(&self, key: &str) -> String {
        match key {
            "similarity.delta" => self.delta.to_string(),
            "similarity.gamma_prime_l" => self.gamma_prime_l.to_string(),
            "similarity.gamma_prime_d" => self.gamma_prime_d.to_string(),
            "cnn.filters" => self.cnn.filters.to_string(),
            "cnn.kernel_height" => self.cnn.kernel.0.to_string(),
            "cnn.kernel_width" => self.cnn.kernel.1.to_string(),
            "cnn.pool_height" => self.cnn.pool.0.to_string(),
            "cnn.pool_width" => self.cnn.pool.1.to_string(),
            "cnn.pool" => match self.cnn.pool_mode {
                PoolMode::Max => "max".into(),
                PoolMode::Mean => "mean".into(),
            },
            "cnn.hidden_units" => self.cnn.hidden_units.to_string(),
            "cnn.learning_rate" => self.train.learning_rate.to_string(),
            "cnn.l2" => self.train.l2.to_string(),
            "cnn.epochs" => self.train.epochs.to_string(),
            "cnn.batch_size" => self.train.batch_size.to_string(),
            "gbdt.num_trees" => self.gbdt.num_trees.to_string(),
            "gbdt.max_depth" => self.gbdt.max_depth.to_string(),
            "gbdt.learning_rate" => self.gbdt.learning_rate.to_string(),
            "gbdt.lambda" => self.gbdt.lambda.to_string(),
            "gbdt.min_split_gain" => self.gbdt.min_split_gain.to_string(),
            "gbdt.min_child_hessian" => self.gbdt.min_child_hessian.to_string(),
            "gbdt.base_score" => self.gbdt.base_score.to_string(),
            "gbdt.subsample" => self.gbdt.subsample.to_string(),
            "gbdt.colsample" => self.gbdt.colsample.to_string(),
            "gbdt.seed" => self.gbdt.seed.to_string(),
            "pipeline.folds" => self.folds.to_string(),
            "pipeline.seed" => self.master_seed.to_string(),
            "pipeline.leaky_similarities" => self.leaky_similarities.to_string(),
            "pipeline.shuffle_labels" => self.shuffle_labels.to_string(),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    pub fn seeds(&self) -> SeedTree {
        SeedTree::new(self.master_seed)
    }
}

/// Parses a configuration from text; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: n + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Stochastic stages that draw from the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Negatives,
    CnnInit,
    CnnBatches,
    TestNegatives,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Negatives,
        Stage::CnnInit,
        Stage::CnnBatches,
        Stage::TestNegatives,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Negatives => "negatives",
            Stage::CnnInit => "cnn-init",
            Stage::CnnBatches => "cnn-batches",
            Stage::TestNegatives => "test-negatives",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::UnknownStage(s.to_string()))
    }
}

/// Fold id used for stages of a model trained on all data.
pub const FULL_DATA_FOLD: u64 = u64::MAX;

/// Derives per-(fold, stage) seeds from one master seed.
///
/// `seed = splitmix64(fnv1a64(master_le || fold_le || stage_utf8))`. The
/// derivation is part of the output contract: changing it changes every
/// report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    pub master_seed: u64,
}

impl SeedTree {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn seed(&self, fold: u64, stage: Stage) -> u64 {
        const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = FNV_OFFSET;
        let bytes = self
            .master_seed
            .to_le_bytes()
            .into_iter()
            .chain(fold.to_le_bytes())
            .chain(stage.name().bytes());
        for b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(FNV_PRIME);
        }
        splitmix64(hash)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `(fold, stage)`; the stage is given by name.
pub fn derive_seed(tree: &SeedTree, fold: u64, stage: &str) -> Result<u64> {
    Ok(tree.seed(fold, stage.parse()?))
}
