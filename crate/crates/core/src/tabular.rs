//! Pre-evaluated surrogate benchmark tables.
//!
//! A [`SurrogateTable`] stands in for live training: each configuration has a
//! full per-epoch accuracy curve and per-epoch wall time, so "training" is a
//! lookup. Tables are immutable once built.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hpspace::{Configuration, HyperparameterSpace};
use crate::sobol::Sobol;

/// Smallest table that still has a top-10 target below its best entry.
pub const MIN_TABLE_ENTRIES: usize = 11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    accuracy: Vec<f64>,
    epoch_seconds: Vec<f64>,
}

impl LearningCurve {
    pub fn new(accuracy: Vec<f64>, epoch_seconds: Vec<f64>) -> Result<Self> {
        if accuracy.is_empty() {
            return Err(domain!("learning curve needs at least one epoch"));
        }
        if accuracy.len() != epoch_seconds.len() {
            return Err(domain!(
                "accuracy has {} epochs but epoch_seconds has {}",
                accuracy.len(),
                epoch_seconds.len()
            ));
        }
        if let Some(a) = accuracy.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(domain!("accuracy {a} outside [0, 1]"));
        }
        if let Some(t) = epoch_seconds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(domain!("epoch time {t} must be positive"));
        }
        Ok(Self { accuracy, epoch_seconds })
    }

    pub fn len(&self) -> usize {
        self.accuracy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracy.is_empty()
    }

    pub fn accuracy(&self) -> &[f64] {
        &self.accuracy
    }

    pub fn epoch_seconds(&self) -> &[f64] {
        &self.epoch_seconds
    }

    /// Best accuracy over the whole curve.
    pub fn terminal_best(&self) -> f64 {
        self.accuracy.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Best accuracy over epochs `1..=j`.
    pub fn best_until(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.len() {
            return Err(domain!("epoch {j} outside 1..={}", self.len()));
        }
        Ok(self.accuracy[..j].iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableEntry {
    pub config: Configuration,
    pub curve: LearningCurve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateTable {
    space: HyperparameterSpace,
    max_epoch: usize,
    entries: Vec<TableEntry>,
    /// 1-based rank by terminal-best accuracy, indexed by id.
    ranks: Vec<usize>,
}

impl SurrogateTable {
    /// Builds a table, checking ids are `0..n` in order, every curve has
    /// `max_epoch` epochs and every configuration lies inside `space`.
    pub fn new(space: HyperparameterSpace, max_epoch: usize, entries: Vec<TableEntry>) -> Result<Self> {
        if max_epoch == 0 {
            return Err(Error::InvalidTable("max_epoch must be >= 1".into()));
        }
        if entries.len() < MIN_TABLE_ENTRIES {
            return Err(Error::InvalidTable(alloc::format!(
                "need >= {MIN_TABLE_ENTRIES} entries, got {}",
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.config.id != i {
                return Err(Error::InvalidTable(alloc::format!(
                    "ids must be contiguous from 0: position {i} holds id {}",
                    e.config.id
                )));
            }
            if e.curve.len() != max_epoch {
                return Err(Error::InvalidTable(alloc::format!(
                    "entry {i}: curve has {} epochs, table max_epoch is {max_epoch}",
                    e.curve.len()
                )));
            }
            space
                .validate(&e.config.values)
                .map_err(|err| Error::InvalidTable(alloc::format!("entry {i}: {err}")))?;
        }

        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            entries[b]
                .curve
                .terminal_best()
                .total_cmp(&entries[a].curve.terminal_best())
                .then(a.cmp(&b))
        });
        let mut ranks = alloc::vec![0; entries.len()];
        for (pos, &id) in order.iter().enumerate() {
            ranks[id] = pos + 1;
        }
        Ok(Self { space, max_epoch, entries, ranks })
    }

    pub fn space(&self) -> &HyperparameterSpace {
        &self.space
    }

    pub fn max_epoch(&self) -> usize {
        self.max_epoch
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn entry(&self, id: usize) -> Result<&TableEntry> {
        self.entries.get(id).ok_or(Error::UnknownId(id))
    }

    pub fn curve(&self, id: usize) -> Result<&LearningCurve> {
        Ok(&self.entry(id)?.curve)
    }

    pub fn best_until(&self, id: usize, j: usize) -> Result<f64> {
        self.curve(id)?.best_until(j)
    }

    pub fn max_terminal_best(&self) -> f64 {
        self.entries.iter().map(|e| e.curve.terminal_best()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The k-th largest terminal-best accuracy (k = 10 gives the usual
    /// "top-10" target).
    pub fn target_accuracy(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.len() {
            return Err(domain!("k must lie in 1..={}, got {k}", self.len()));
        }
        let id = self.ranks.iter().position(|&r| r == k).expect("ranks form a permutation");
        Ok(self.entries[id].curve.terminal_best())
    }

    /// 1-based rank by terminal-best accuracy, ties broken by ascending id.
    pub fn rank(&self, id: usize) -> Result<usize> {
        self.ranks.get(id).copied().ok_or(Error::UnknownId(id))
    }

    /// `(rank(id) - 1) / n`; zero for the best entry.
    pub fn rank_regret(&self, id: usize) -> Result<f64> {
        Ok((self.rank(id)? - 1) as f64 / self.len() as f64)
    }
}

/// Parameters of the synthetic learning-curve generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveModel {
    pub max_epoch: usize,
    /// Terminal accuracy of the worst configuration (random-guess level).
    pub min_accuracy: f64,
    /// Terminal accuracy of the best configuration.
    pub max_accuracy: f64,
    /// Range of the per-configuration saturation constant, in epochs.
    pub lambda_range: [f64; 2],
    pub noise_std: f64,
    /// Fraction of configurations whose first `⌊E/4⌋` epochs are held at `late_floor`.
    pub late_bloomer_fraction: f64,
    pub late_floor: f64,
    pub epoch_seconds_range: [f64; 2],
    /// Number of bumps in the multimodal response surface.
    pub modes: usize,
}

impl Default for CurveModel {
    fn default() -> Self {
        Self {
            max_epoch: 15,
            min_accuracy: 0.1,
            max_accuracy: 0.95,
            lambda_range: [0.5, 4.0],
            noise_std: 0.005,
            late_bloomer_fraction: 0.0,
            late_floor: 0.1,
            epoch_seconds_range: [20.0, 120.0],
            modes: 4,
        }
    }
}

impl CurveModel {
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        if self.max_epoch == 0 {
            bad.push("max_epoch must be >= 1".into());
        }
        if !(0.0 <= self.min_accuracy && self.min_accuracy < self.max_accuracy && self.max_accuracy < 1.0) {
            bad.push("need 0 <= min_accuracy < max_accuracy < 1".into());
        }
        if !(0.0 <= self.lambda_range[0] && self.lambda_range[0] <= self.lambda_range[1]) {
            bad.push("lambda_range must be ordered and non-negative".into());
        }
        if !(self.noise_std >= 0.0) {
            bad.push("noise_std must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.late_bloomer_fraction) {
            bad.push("late_bloomer_fraction must lie in [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.late_floor) {
            bad.push("late_floor must lie in [0, 1)".into());
        }
        let [t0, t1] = self.epoch_seconds_range;
        if !(t0 > 0.0 && t0 <= t1 && t1.is_finite()) {
            bad.push("epoch_seconds_range must be positive and ordered".into());
        }
        if self.modes == 0 {
            bad.push("modes must be >= 1".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(domain!("curve model: {}", bad.join("; ")))
        }
    }
}

/// Saturating learning curve `y_inf * (1 - exp(-j / lambda))`; `lambda = 0`
/// jumps straight to `y_inf`.
pub fn saturating_curve(y_inf: f64, lambda: f64, epoch: usize) -> f64 {
    if lambda <= 0.0 {
        return y_inf;
    }
    y_inf * (1.0 - libm::exp(-(epoch as f64) / lambda))
}

// Accuracies are kept strictly below 1 so the hybrid transform stays finite.
const ACCURACY_CEILING: f64 = 0.999;

/// Generates `n` Sobol-sampled configurations with synthetic learning curves.
///
/// The terminal accuracy is a sum of Gaussian bumps over the configuration's
/// unit coordinates, rescaled so the worst and best sampled configurations
/// land on `min_accuracy` and `max_accuracy`.
pub fn generate_synthetic(
    space: &HyperparameterSpace,
    n: usize,
    seed: u64,
    model: &CurveModel,
) -> Result<SurrogateTable> {
    if n < MIN_TABLE_ENTRIES {
        return Err(domain!("need >= {MIN_TABLE_ENTRIES} entries, got {n}"));
    }
    model.validate()?;
    let d = space.dim();
    let sobol = Sobol::new(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let centers: Vec<Vec<f64>> =
        (0..model.modes).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let weights: Vec<f64> =
        (0..model.modes).map(|k| if k == 0 { 1.0 } else { rng.random_range(0.35..0.8) }).collect();
    let widths: Vec<f64> = (0..model.modes).map(|_| rng.random_range(0.12..0.3)).collect();

    let mut configs = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for id in 0..n {
        let u = sobol.point((id + 1) as u32);
        let values = space.decode(&u)?;
        // score the canonical coordinates so the surface is a function of the
        // configuration itself (categoricals and integers are bucketed)
        let unit = space.to_unit(&values)?;
        let f: f64 = centers
            .iter()
            .zip(&weights)
            .zip(&widths)
            .map(|((c, w), s)| {
                let dist2 = unit.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / d as f64;
                w * libm::exp(-dist2 / (2.0 * s * s))
            })
            .sum();
        raw.push(f);
        configs.push(Configuration { id, values });
    }
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let noise = Normal::new(0.0, model.noise_std).map_err(|e| domain!("noise model: {e}"))?;
    let e = model.max_epoch;
    let late_epochs = e / 4;
    let mut entries = Vec::with_capacity(n);
    for (config, f) in configs.into_iter().zip(raw) {
        let y_inf = model.min_accuracy + (model.max_accuracy - model.min_accuracy) * (f - lo) / span;
        let lambda = rng.random_range(model.lambda_range[0]..=model.lambda_range[1]);
        let late = rng.random::<f64>() < model.late_bloomer_fraction;
        let per_epoch = rng.random_range(model.epoch_seconds_range[0]..=model.epoch_seconds_range[1]);
        let accuracy: Vec<f64> = (1..=e)
            .map(|j| {
                let mut a = saturating_curve(y_inf, lambda, j);
                if model.noise_std > 0.0 {
                    a += noise.sample(&mut rng);
                }
                if late && j <= late_epochs {
                    a = a.min(model.late_floor);
                }
                a.clamp(0.0, ACCURACY_CEILING)
            })
            .collect();
        let curve = LearningCurve::new(accuracy, alloc::vec![per_epoch; e])?;
        entries.push(TableEntry { config, curve });
    }
    SurrogateTable::new(space.clone(), e, entries)
}

/// A small mixed space shaped like a typical CNN tuning problem; used as the
/// default space for synthetic benchmarks.
pub fn default_space() -> HyperparameterSpace {
    use crate::hpspace::{ParamDef, Scale};
    HyperparameterSpace::new(alloc::vec![
        ParamDef::continuous("learning_rate", 1e-4, 0.4, Scale::Log).unwrap(),
        ParamDef::discrete("batch_size", 32, 256).unwrap(),
        ParamDef::continuous("dropout", 0.0, 0.9, Scale::Linear).unwrap(),
        ParamDef::discrete("filters", 8, 128).unwrap(),
        ParamDef::continuous("weight_decay", 1e-6, 1e-2, Scale::Log).unwrap(),
        ParamDef::categorical("optimizer", ["sgd", "momentum", "adam", "rmsprop"]).unwrap(),
    ])
    .unwrap()
}
