//! Experiment configuration, read from TOML.
//!
//! ```toml
//! n_trials = 100
//! seed = 0
//! workers = 6
//! alpha = 0.3
//! beta = 0.1
//! duplicates = "in_progress"   # naive | random | next_candidate | in_progress
//! dispatch = "idle-any"        # idle-any | synchronous
//! fit_seconds = 0.0
//! time_budget = 86400.0        # virtual seconds, optional
//!
//! [benchmark]
//! table = "bench.jsonl"        # or a [benchmark.synthetic] block
//!
//! [algorithm]
//! kind = "portfolio"           # portfolio | single | gp-hedge | random
//! arms = ["gp-ei", "gp-pi", "gp-ucb", "rf-ei", "rf-pi", "rf-ucb"]
//! kappa = 2.0
//!
//! [etr]
//! kind = "cr"                  # none | cr | msr | custom
//!
//! [target]
//! top_k = 10                   # or accuracy = 0.93
//! ```

use std::path::{Path, PathBuf};

use deepbo_core::acquisition::{AcqKind, DEFAULT_ETA, DEFAULT_KAPPA};
use deepbo_core::engine::{Algorithm, Arm, Dispatch, DuplicateStrategy, ModelSettings, Portfolio, TrialSettings};
use deepbo_core::etr::{AverageMode, EtrCheckpoint, EtrPolicy, DEFAULT_BETA};
use deepbo_core::hpspace::HyperparameterSpace;
use deepbo_core::surrogate::SurrogateKind;
use deepbo_core::tabular::{default_space, generate_synthetic, CurveModel, SurrogateTable};
use deepbo_core::xform::DEFAULT_ALPHA;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::table_io::load_table;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub etr: EtrConfig,
    #[serde(default)]
    pub duplicates: DuplicateStrategy,
    #[serde(default)]
    pub dispatch: Dispatch,
    #[serde(default)]
    pub fit_seconds: f64,
    #[serde(default)]
    pub target: TargetConfig,
    #[serde(default = "one")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget: Option<f64>,
}

fn one() -> usize {
    1
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("every field has a default")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the built-in six-parameter CNN-like space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<HyperparameterSpace>,
    #[serde(default)]
    pub curve: CurveModel,
}

impl SyntheticConfig {
    pub fn generate(&self) -> Result<SurrogateTable> {
        let space = self.space.clone().unwrap_or_else(default_space);
        Ok(generate_synthetic(&space, self.n, self.seed, &self.curve)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    #[default]
    Portfolio,
    Single,
    GpHedge,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    #[serde(default)]
    pub kind: AlgorithmKind,
    /// Portfolio arms in rotation order, e.g. `"rf-ucb"`; default is all six.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<String>>,
    /// Arm for `kind = "single"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<String>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// GP hyperparameter samples per fit.
    #[serde(default = "one")]
    pub gp_samples: usize,
    #[serde(default = "default_trees")]
    pub rf_trees: usize,
}

fn default_trees() -> usize {
    50
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            kind: AlgorithmKind::Portfolio,
            arms: None,
            arm: None,
            kappa: DEFAULT_KAPPA,
            eta: DEFAULT_ETA,
            gp_samples: 1,
            rf_trees: default_trees(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtrKindConfig {
    #[default]
    None,
    Cr,
    Msr,
    Custom,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtrConfig {
    #[serde(default)]
    pub kind: EtrKindConfig,
    #[serde(default)]
    pub mode: AverageMode,
    /// First epoch MSR acts at; default `⌈E/3⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msr_warmup: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<EtrCheckpoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { top_k: Some(10), accuracy: None }
    }
}

/// Parses `"gp-ei"`, `"RF-UCB"` and the like.
pub fn parse_arm(s: &str, kappa: f64) -> Option<Arm> {
    let lower = s.to_ascii_lowercase();
    let (model, acq) = lower.split_once(['-', '_'])?;
    let surrogate = match model {
        "gp" => SurrogateKind::Gp,
        "rf" => SurrogateKind::Rf,
        _ => return None,
    };
    let acq = match acq {
        "ei" => AcqKind::Ei,
        "pi" => AcqKind::Pi,
        "ucb" => AcqKind::Ucb { kappa },
        _ => return None,
    };
    Some(Arm { surrogate, acq })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// Reads a config file; a relative table path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(table), Some(dir)) = (&cfg.benchmark.table, path.parent()) {
            if table.is_relative() {
                cfg.benchmark.table = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field that can be checked without the table and lists
    /// all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        match (&self.benchmark.table, &self.benchmark.synthetic) {
            (Some(_), Some(_)) => bad.push("benchmark: give either `table` or `synthetic`, not both".into()),
            (None, None) => bad.push("benchmark: one of `table` or `synthetic` is required".into()),
            (None, Some(s)) => {
                if s.n < deepbo_core::tabular::MIN_TABLE_ENTRIES {
                    bad.push(format!("benchmark.synthetic.n: need >= 11, got {}", s.n));
                }
                if let Err(e) = s.curve.validate() {
                    bad.push(format!("benchmark.synthetic.curve: {e}"));
                }
            }
            _ => {}
        }
        if self.workers == 0 {
            bad.push("workers: must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            bad.push(format!("alpha: must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta <= 0.5) {
            bad.push(format!("beta: must lie in (0, 0.5], got {}", self.beta));
        }
        if !(self.fit_seconds >= 0.0 && self.fit_seconds.is_finite()) {
            bad.push(format!("fit_seconds: must be finite and >= 0, got {}", self.fit_seconds));
        }
        if self.n_trials == 0 {
            bad.push("n_trials: must be >= 1".into());
        }
        if let Some(b) = self.time_budget {
            if !(b > 0.0) {
                bad.push(format!("time_budget: must be positive, got {b}"));
            }
        }
        match (self.target.top_k, self.target.accuracy) {
            (Some(_), Some(_)) => bad.push("target: give either `top_k` or `accuracy`, not both".into()),
            (None, None) => bad.push("target: one of `top_k` or `accuracy` is required".into()),
            (Some(0), None) => bad.push("target.top_k: must be >= 1".into()),
            (None, Some(c)) if !(0.0..1.0).contains(&c) => bad.push(format!("target.accuracy: must lie in [0, 1), got {c}")),
            _ => {}
        }
        let a = &self.algorithm;
        if !(a.kappa > 0.0) {
            bad.push(format!("algorithm.kappa: must be positive, got {}", a.kappa));
        }
        if !(a.eta > 0.0) {
            bad.push(format!("algorithm.eta: must be positive, got {}", a.eta));
        }
        if a.gp_samples == 0 {
            bad.push("algorithm.gp_samples: must be >= 1".into());
        }
        if a.rf_trees == 0 {
            bad.push("algorithm.rf_trees: must be >= 1".into());
        }
        match a.kind {
            AlgorithmKind::Single => match &a.arm {
                None => bad.push("algorithm.arm: required when kind = \"single\"".into()),
                Some(s) if parse_arm(s, a.kappa).is_none() => bad.push(format!("algorithm.arm: unknown arm {s:?}")),
                _ => {}
            },
            AlgorithmKind::Portfolio => {
                if let Some(arms) = &a.arms {
                    if arms.is_empty() {
                        bad.push("algorithm.arms: must not be empty".into());
                    }
                    for s in arms {
                        if parse_arm(s, a.kappa).is_none() {
                            bad.push(format!("algorithm.arms: unknown arm {s:?}"));
                        }
                    }
                    if let Err(e) = self.portfolio() {
                        bad.push(format!("algorithm.arms: {e}"));
                    }
                }
            }
            _ => {}
        }
        if self.etr.kind == EtrKindConfig::Custom && self.etr.checkpoints.is_empty() {
            bad.push("etr.checkpoints: custom rule needs at least one checkpoint".into());
        }
        if self.etr.kind != EtrKindConfig::Custom && !self.etr.checkpoints.is_empty() {
            bad.push("etr.checkpoints: only valid with kind = \"custom\"".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    fn portfolio(&self) -> Result<Portfolio> {
        let a = &self.algorithm;
        match &a.arms {
            None => Ok(Portfolio::default_six(a.kappa)),
            Some(names) => {
                let arms = names.iter().filter_map(|s| parse_arm(s, a.kappa)).collect();
                Ok(Portfolio::new(arms)?)
            }
        }
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        let a = &self.algorithm;
        Ok(match a.kind {
            AlgorithmKind::Portfolio => Algorithm::Portfolio(self.portfolio()?),
            AlgorithmKind::Single => {
                let name = a.arm.as_deref().unwrap_or_default();
                let arm = parse_arm(name, a.kappa)
                    .ok_or_else(|| Error::Config(vec![format!("algorithm.arm: unknown arm {name:?}")]))?;
                Algorithm::Portfolio(Portfolio::single(arm))
            }
            AlgorithmKind::GpHedge => Algorithm::GpHedge { eta: a.eta, kappa: a.kappa },
            AlgorithmKind::Random => Algorithm::Random,
        })
    }

    pub fn etr_policy(&self, max_epoch: usize) -> Result<EtrPolicy> {
        let field = |e: deepbo_core::Error| Error::Config(vec![format!("etr: {e}")]);
        match self.etr.kind {
            EtrKindConfig::None => Ok(EtrPolicy::none()),
            EtrKindConfig::Cr => EtrPolicy::compound(max_epoch, self.beta, self.etr.mode).map_err(field),
            EtrKindConfig::Msr => EtrPolicy::median_stopping(max_epoch, self.etr.msr_warmup).map_err(field),
            EtrKindConfig::Custom => {
                EtrPolicy::custom(self.etr.checkpoints.clone(), max_epoch, self.etr.mode).map_err(field)
            }
        }
    }

    pub fn load_benchmark(&self) -> Result<SurrogateTable> {
        match (&self.benchmark.table, &self.benchmark.synthetic) {
            (Some(path), None) => load_table(path),
            (None, Some(s)) => s.generate(),
            _ => Err(Error::Config(vec!["benchmark: give exactly one of `table` or `synthetic`".into()])),
        }
    }

    pub fn target_accuracy(&self, table: &SurrogateTable) -> Result<f64> {
        match (self.target.top_k, self.target.accuracy) {
            (Some(k), None) => table
                .target_accuracy(k)
                .map_err(|e| Error::Config(vec![format!("target.top_k: {e}")])),
            (None, Some(c)) => Ok(c),
            _ => Err(Error::Config(vec!["target: give exactly one of `top_k` or `accuracy`".into()])),
        }
    }

    /// Settings for the trial with seed `seed` on `table`.
    pub fn trial_settings(&self, table: &SurrogateTable, seed: u64) -> Result<TrialSettings> {
        let mut s = TrialSettings::new(self.algorithm()?, self.workers, self.target_accuracy(table)?, seed);
        s.alpha = self.alpha;
        s.etr = self.etr_policy(table.max_epoch())?;
        s.duplicates = self.duplicates;
        s.time_budget = self.time_budget;
        s.dispatch = self.dispatch;
        s.fit_seconds = self.fit_seconds;
        let mut models = ModelSettings::default();
        models.gp.samples = self.algorithm.gp_samples;
        models.rf.n_trees = self.algorithm.rf_trees;
        s.models = models;
        s.validate(table)?;
        Ok(s)
    }
}
