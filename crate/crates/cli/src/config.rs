//! Experiment configuration: TOML file, flag overrides, derived settings.
//!
//! Precedence is flag > file > built-in default. The merged configuration is
//! serialized back out as `config.snapshot` next to the run outputs, and its
//! FNV-1a hash is stamped into every run record so records and settings can
//! be matched up later.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use alpool::data::{generate_synthetic, load_manifest, Dataset, SynthParams};
use alpool::harness::{HarnessConfig, Schedule, Strategy, DEFAULT_AG_METRICS};
use alpool::metrics::{EntropyKind, MetricId};
use alpool::scoremap::{PoolConfig, PoolMode, SeparationKind};
use alpool::{Error, Result};

/// Where the dataset comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Generated in memory (or on disk by `generate`) from `[dataset.synthetic]`.
    #[default]
    Synthetic,
    /// Loaded from the manifest file named by `dataset.manifest`.
    Manifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub source: SourceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    pub synthetic: SynthParams,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            source: SourceKind::Synthetic,
            manifest: None,
            synthetic: SynthParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub mode: PoolMode,
    /// Pooled instance counts; `None` means 10% of the grid, at least one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_top: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_bot: Option<usize>,
    pub alpha: f64,
    pub maps_per_class: usize,
    pub separation: SeparationKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub entropy: EntropyKind,
    pub warm_start: bool,
    pub reference_epochs: usize,
    /// Metrics the AG and VOTE strategies combine, in turn order.
    pub ag_metrics: Vec<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mode: PoolMode::Weldon,
            k_top: None,
            k_bot: None,
            alpha: 1.0,
            maps_per_class: 1,
            separation: SeparationKind::Extremes,
            learning_rate: 0.1,
            batch_size: 16,
            entropy: EntropyKind::Plain,
            warm_start: false,
            reference_epochs: 35,
            ag_metrics: DEFAULT_AG_METRICS.iter().map(|m| m.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub initial_size: usize,
    pub additions: Vec<usize>,
    /// Training epochs per iteration; one more entry than `additions`.
    pub epochs: Vec<usize>,
    /// Scales every epoch entry (rounded, floored at 1) for quick desk runs.
    pub epoch_factor: f64,
    pub trials: usize,
    /// Explicit per-trial seeds; left empty they derive from the global seed.
    pub trial_seeds: Vec<u64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            initial_size: 60,
            additions: vec![60, 60, 60, 60, 300],
            epochs: vec![35, 35, 35, 35, 25, 25],
            epoch_factor: 1.0,
            trials: 3,
            trial_seeds: Vec::new(),
        }
    }
}

/// The full experiment description, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Strategies to run, e.g. `["UNC", "AG", "R"]`.
    pub strategies: Vec<String>,
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("runs/experiment"),
            strategies: Strategy::default_suite()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            dataset: DatasetConfig::default(),
            model: ModelConfig::default(),
            schedule: ScheduleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads the file, or the built-in defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {}", path.display(), flatten(&e.to_string()))))
    }

    /// Applies command-line overrides on top of the file values.
    pub fn apply_overrides(&mut self, out: Option<PathBuf>, seed: Option<u64>) {
        if let Some(out) = out {
            self.output_dir = out;
        }
        if let Some(seed) = seed {
            self.seed = seed;
        }
    }

    /// The merged configuration as it is written to `config.snapshot`.
    pub fn snapshot_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(format!("snapshot: {e}")))
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match self.dataset.source {
            SourceKind::Synthetic => generate_synthetic(&self.dataset.synthetic),
            SourceKind::Manifest => {
                let path = self.dataset.manifest.as_deref().ok_or_else(|| {
                    Error::config("dataset.source = \"manifest\" needs dataset.manifest set")
                })?;
                load_manifest(path)
            }
        }
    }

    pub fn pool(&self, height: usize, width: usize) -> PoolConfig {
        let auto = PoolConfig::auto_k(height, width);
        PoolConfig {
            mode: self.model.mode,
            k_top: self.model.k_top.unwrap_or(auto),
            k_bot: self.model.k_bot.unwrap_or(auto),
            alpha: self.model.alpha,
            maps_per_class: self.model.maps_per_class,
            separation: self.model.separation,
        }
    }

    pub fn harness(&self, height: usize, width: usize) -> Result<HarnessConfig> {
        let mut cfg = HarnessConfig::new(self.pool(height, width));
        cfg.learning_rate = self.model.learning_rate;
        cfg.batch_size = self.model.batch_size;
        cfg.entropy = self.model.entropy;
        cfg.warm_start = self.model.warm_start;
        cfg.reference_epochs = self.model.reference_epochs;
        cfg.ag_metrics = self
            .model
            .ag_metrics
            .iter()
            .map(|name| name.parse::<MetricId>())
            .collect::<Result<Vec<_>>>()?;
        Ok(cfg)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let sc = &self.schedule;
        if !sc.epoch_factor.is_finite() || sc.epoch_factor <= 0.0 {
            return Err(Error::config(format!(
                "epoch_factor must be a positive finite number, got {}",
                sc.epoch_factor
            )));
        }
        let epochs = sc
            .epochs
            .iter()
            .map(|&e| (((e as f64) * sc.epoch_factor).round() as usize).max(1))
            .collect();
        let schedule = if sc.trial_seeds.is_empty() {
            Schedule::with_derived_seeds(
                sc.initial_size,
                sc.additions.clone(),
                epochs,
                sc.trials,
                self.seed,
            )
        } else {
            Schedule {
                initial_size: sc.initial_size,
                additions: sc.additions.clone(),
                epochs,
                trials: sc.trials,
                trial_seeds: sc.trial_seeds.clone(),
            }
        };
        schedule.validate_shape()?;
        Ok(schedule)
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>> {
        if self.strategies.is_empty() {
            return Err(Error::config("strategies must name at least one strategy"));
        }
        self.strategies
            .iter()
            .map(|name| name.parse::<Strategy>())
            .collect()
    }
}

/// 64-bit FNV-1a over the snapshot text, printed as 16 hex digits.
pub fn config_hash(text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// TOML errors span multiple lines with a caret diagram; keep the first line.
fn flatten(message: &str) -> String {
    message
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}
