//! Early-termination rules.
//!
//! Every rule is expressed with the same four knobs per checkpoint: the
//! observation window `start..=end` whose running average forms the reference
//! population, the epoch `eval` at which the decision is taken, and the
//! percentile `threshold` of that population a configuration must reach.
//!
//! * The compound rule (CR) has two checkpoints. At `j1 = ⌊E/2⌋` it drops
//!   configurations whose best-so-far is below the β-percentile of the
//!   running averages over epochs `1..=j1`. At `j2 = ⌊(1-β)E⌋` it keeps only
//!   those reaching the (1-β)-percentile of the averages over `j1..=j2`,
//!   computed among entries that trained past `j1`.
//! * The median stopping rule (MSR) compares against the median of the
//!   running averages `1..=epoch` at every epoch after a warm-up.
//!
//! Decisions always use raw accuracies. Percentiles use the nearest-rank
//! definition; MSR uses the conventional midpoint median.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::stats::{median, nearest_rank};
use crate::tabular::SurrogateTable;

pub const DEFAULT_BETA: f64 = 0.1;
/// MSR needs at least this many reference curves before it acts.
pub const MSR_MIN_POPULATION: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    /// `(1/(j-i+1)) Σ_{k=i..j} f_k`
    #[default]
    Mean,
    /// `(1/j) Σ_{k=i..j} f_k`, i.e. the window sum divided by the end epoch.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Terminate,
}

/// Running average of `curve` over epochs `i..=j` (1-based).
pub fn running_average(curve: &[f64], i: usize, j: usize, mode: AverageMode) -> Result<f64> {
    if i == 0 || i > j || j > curve.len() {
        return Err(domain!("running average window {i}..={j} invalid for {} epochs", curve.len()));
    }
    let sum: f64 = curve[i - 1..j].iter().sum();
    Ok(match mode {
        AverageMode::Mean => sum / (j - i + 1) as f64,
        AverageMode::Literal => sum / j as f64,
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 0.5 {
        Ok(())
    } else {
        Err(domain!("beta must lie in (0, 0.5], got {beta}"))
    }
}

/// CR checkpoint epochs `(⌊0.5E⌋, ⌊(1-β)E⌋)`.
pub fn checkpoints_cr(max_epoch: usize, beta: f64) -> Result<(usize, usize)> {
    check_beta(beta)?;
    if max_epoch < 2 {
        return Err(domain!("compound rule needs max_epoch >= 2, got {max_epoch}"));
    }
    let e = max_epoch as f64;
    let j1 = libm::floor(0.5 * e) as usize;
    // floor((1-β)E) with a guard so e.g. 0.9 * 100 does not land on 89.999...
    let j2 = libm::floor((1.0 - beta) * e + 1e-9) as usize;
    Ok((j1, j2.max(j1)))
}

/// Expected number of configurations visited per unit time relative to no
/// early termination.
pub fn q(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let keep = 1.0 - beta;
    Ok(1.0 / (0.5 * beta + keep * keep * keep + keep * beta))
}

/// One checkpoint of a rule: observe epochs `start..=end`, decide at `eval`
/// against the `threshold` percentile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtrCheckpoint {
    pub start: usize,
    pub end: usize,
    pub eval: usize,
    pub threshold: f64,
}

impl EtrCheckpoint {
    pub fn validate(&self, max_epoch: usize) -> Result<()> {
        let ok = 1 <= self.start
            && self.start <= self.end
            && self.end <= self.eval
            && self.eval <= max_epoch
            && (0.0..=1.0).contains(&self.threshold);
        if ok {
            Ok(())
        } else {
            Err(domain!(
                "checkpoint needs 1 <= s <= e <= j <= {max_epoch} and h in [0, 1], got \
                 s={} e={} j={} h={}",
                self.start,
                self.end,
                self.eval,
                self.threshold
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtrKind {
    None,
    Compound,
    MedianStopping,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtrPolicy {
    kind: EtrKind,
    beta: f64,
    checkpoints: Vec<EtrCheckpoint>,
    mode: AverageMode,
    msr_warmup: usize,
}

impl EtrPolicy {
    pub fn none() -> Self {
        Self {
            kind: EtrKind::None,
            beta: DEFAULT_BETA,
            checkpoints: Vec::new(),
            mode: AverageMode::Mean,
            msr_warmup: 0,
        }
    }

    pub fn compound(max_epoch: usize, beta: f64, mode: AverageMode) -> Result<Self> {
        let (j1, j2) = checkpoints_cr(max_epoch, beta)?;
        Ok(Self {
            kind: EtrKind::Compound,
            beta,
            checkpoints: alloc::vec![
                EtrCheckpoint { start: 1, end: j1, eval: j1, threshold: beta },
                EtrCheckpoint { start: j1, end: j2, eval: j2, threshold: 1.0 - beta },
            ],
            mode,
            msr_warmup: 0,
        })
    }

    /// MSR with its first evaluation at `warmup` (default `⌈E/3⌉`).
    pub fn median_stopping(max_epoch: usize, warmup: Option<usize>) -> Result<Self> {
        if max_epoch == 0 {
            return Err(domain!("max_epoch must be >= 1"));
        }
        let warmup = warmup.unwrap_or(max_epoch.div_ceil(3)).max(1);
        Ok(Self {
            kind: EtrKind::MedianStopping,
            beta: 0.5,
            checkpoints: Vec::new(),
            mode: AverageMode::Mean,
            msr_warmup: warmup,
        })
    }

    /// A rule built directly from knob settings. Checkpoint `k > 0` draws
    /// its population from entries that trained past checkpoint `k-1`.
    pub fn custom(mut checkpoints: Vec<EtrCheckpoint>, max_epoch: usize, mode: AverageMode) -> Result<Self> {
        if checkpoints.is_empty() {
            return Err(domain!("custom rule needs at least one checkpoint"));
        }
        for c in &checkpoints {
            c.validate(max_epoch)?;
        }
        checkpoints.sort_by_key(|c| c.eval);
        Ok(Self { kind: EtrKind::Custom, beta: DEFAULT_BETA, checkpoints, mode, msr_warmup: 0 })
    }

    pub fn kind(&self) -> EtrKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn checkpoints(&self) -> &[EtrCheckpoint] {
        &self.checkpoints
    }

    pub fn mode(&self) -> AverageMode {
        self.mode
    }

    pub fn msr_warmup(&self) -> usize {
        self.msr_warmup
    }

    /// Decides whether a configuration whose best accuracy so far is
    /// `y_best` keeps training after `epoch`. `population` holds the curves
    /// of the other history entries.
    pub fn decide(&self, y_best: f64, epoch: usize, population: &[&[f64]]) -> Decision {
        match self.kind {
            EtrKind::None => Decision::Continue,
            EtrKind::MedianStopping => {
                if epoch < self.msr_warmup {
                    Decision::Continue
                } else {
                    msr_decide(y_best, epoch, population)
                }
            }
            EtrKind::Compound | EtrKind::Custom => {
                checkpoint_decide(&self.checkpoints, self.mode, y_best, epoch, population)
            }
        }
    }
}

fn checkpoint_decide(
    checkpoints: &[EtrCheckpoint],
    mode: AverageMode,
    y_best: f64,
    epoch: usize,
    population: &[&[f64]],
) -> Decision {
    for (k, c) in checkpoints.iter().enumerate() {
        if c.eval != epoch || c.threshold <= 0.0 {
            continue;
        }
        let past = k.checked_sub(1).map(|p| checkpoints[p].eval);
        let values: Vec<f64> = population
            .iter()
            .filter(|curve| curve.len() >= c.end && past.is_none_or(|p| curve.len() > p))
            .filter_map(|curve| running_average(curve, c.start, c.end, mode).ok())
            .collect();
        if let Some(threshold) = nearest_rank(&values, c.threshold) {
            if y_best < threshold {
                return Decision::Terminate;
            }
        }
    }
    Decision::Continue
}

/// Compound-rule decision at `epoch`; a no-op away from the two checkpoints
/// and whenever the reference population is empty.
pub fn cr_decide(
    y_best: f64,
    epoch: usize,
    population: &[&[f64]],
    max_epoch: usize,
    beta: f64,
    mode: AverageMode,
) -> Result<Decision> {
    let policy = EtrPolicy::compound(max_epoch, beta, mode)?;
    Ok(policy.decide(y_best, epoch, population))
}

/// Median stopping decision at `epoch` (no warm-up applied here).
pub fn msr_decide(y_best: f64, epoch: usize, population: &[&[f64]]) -> Decision {
    if epoch == 0 {
        return Decision::Continue;
    }
    let values: Vec<f64> = population
        .iter()
        .filter(|curve| curve.len() >= epoch)
        .filter_map(|curve| running_average(curve, 1, epoch, AverageMode::Mean).ok())
        .collect();
    if values.len() < MSR_MIN_POPULATION {
        return Decision::Continue;
    }
    match median(&values) {
        Some(m) if y_best < m => Decision::Terminate,
        _ => Decision::Continue,
    }
}

/// Mean rank regret of the configurations an ETR let train to completion.
pub fn survivor_rank_regret(table: &SurrogateTable, survivors: &[usize]) -> Result<f64> {
    if survivors.is_empty() {
        return Err(Error::UndefinedMetric("survivor set is empty".into()));
    }
    // sum integer ranks first so the mean is a single rounding
    let mut total = 0usize;
    for &id in survivors {
        total += table.rank(id)? - 1;
    }
    Ok(total as f64 / (table.len() * survivors.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn flat(level: f64, len: usize) -> Vec<f64> {
        vec![level; len]
    }

    #[test]
    fn cr_checkpoint_examples() {
        assert_eq!(checkpoints_cr(15, 0.1).unwrap(), (7, 13));
        assert_eq!(checkpoints_cr(100, 0.1).unwrap(), (50, 90));
        assert_eq!(checkpoints_cr(2, 0.5).unwrap(), (1, 1));
        assert!(checkpoints_cr(15, 0.0).is_err());
        assert!(checkpoints_cr(15, 0.6).is_err());
    }

    #[test]
    fn running_average_examples() {
        let c = [0.2, 0.4, 0.6];
        assert!((running_average(&c, 1, 3, AverageMode::Mean).unwrap() - 0.4).abs() < 1e-15);
        assert!((running_average(&c, 2, 3, AverageMode::Literal).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(running_average(&c, 2, 2, AverageMode::Mean).unwrap(), 0.4);
        assert!(running_average(&c, 0, 2, AverageMode::Mean).is_err());
        assert!(running_average(&c, 3, 2, AverageMode::Mean).is_err());
        assert!(running_average(&c, 1, 4, AverageMode::Mean).is_err());
    }

    #[test]
    fn cr_first_checkpoint_examples() {
        // E = 15 -> j1 = 7; ten reference curves with running averages 0.1..=1.0
        let curves: Vec<Vec<f64>> = (1..=10).map(|k| flat(k as f64 / 10.0, 15)).collect();
        let pop: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
        let d = |y| cr_decide(y, 7, &pop, 15, 0.1, AverageMode::Mean).unwrap();
        assert_eq!(d(0.05), Decision::Terminate);
        assert_eq!(d(0.1), Decision::Continue);
        assert_eq!(cr_decide(0.05, 6, &pop, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
        assert_eq!(cr_decide(0.05, 7, &[], 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
    }

    #[test]
    fn cr_second_checkpoint_uses_survivors() {
        // j1 = 7, j2 = 13. Entries that stopped at epoch 7 do not count.
        let mut curves: Vec<Vec<f64>> = (1..=10).map(|k| flat(0.5 + k as f64 / 100.0, 13)).collect();
        curves.push(flat(0.99, 7));
        let pop: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
        // 90th percentile of {0.51..0.60} is 0.59
        let d = |y| cr_decide(y, 13, &pop, 15, 0.1, AverageMode::Mean).unwrap();
        assert_eq!(d(0.585), Decision::Terminate);
        assert_eq!(d(0.59), Decision::Continue);
    }

    #[test]
    fn msr_examples() {
        let curves: Vec<Vec<f64>> = (1..=10).map(|k| flat(k as f64 / 10.0, 5)).collect();
        let pop: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
        assert_eq!(msr_decide(0.5, 3, &pop), Decision::Terminate);
        assert_eq!(msr_decide(0.6, 3, &pop), Decision::Continue);
        assert_eq!(msr_decide(0.0, 3, &pop[..2]), Decision::Continue);
        let policy = EtrPolicy::median_stopping(15, None).unwrap();
        assert_eq!(policy.msr_warmup(), 5);
        assert_eq!(policy.decide(0.0, 4, &pop), Decision::Continue);
    }

    #[test]
    fn q_examples() {
        assert!((q(0.1).unwrap() - 1.0 / 0.869).abs() < 1e-12);
        assert!((q(0.5).unwrap() - 1.6).abs() < 1e-12);
        assert!((q(1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(q(0.0).is_err());
    }

    #[test]
    fn custom_knobs_validated() {
        let bad = EtrCheckpoint { start: 3, end: 2, eval: 4, threshold: 0.5 };
        assert!(EtrPolicy::custom(vec![bad], 10, AverageMode::Mean).is_err());
        let bad = EtrCheckpoint { start: 1, end: 2, eval: 11, threshold: 0.5 };
        assert!(EtrPolicy::custom(vec![bad], 10, AverageMode::Mean).is_err());
        let zero = EtrCheckpoint { start: 1, end: 2, eval: 2, threshold: 0.0 };
        let p = EtrPolicy::custom(vec![zero], 10, AverageMode::Mean).unwrap();
        let curves = [flat(0.9, 10), flat(0.8, 10)];
        let pop: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
        assert_eq!(p.decide(0.0, 2, &pop), Decision::Continue);
    }
}
