use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::history::{EntryStatus, HistorySnapshot};
use crate::acquisition::{integrated_acq, AcqKind};
use crate::error::{domain, Error, Result};
use crate::hpspace::FeatureVector;
use crate::surrogate::{fit_gp, fit_rf, GpOptions, RfOptions, Surrogate, SurrogateKind};

/// A surrogate model paired with an acquisition function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub surrogate: SurrogateKind,
    pub acq: AcqKind,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.surrogate {
            SurrogateKind::Gp => "GP",
            SurrogateKind::Rf => "RF",
        };
        write!(f, "{s}-{}", self.acq.name())
    }
}

/// Ordered arms used in rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    arms: Vec<Arm>,
}

impl Portfolio {
    pub fn new(arms: Vec<Arm>) -> Result<Self> {
        if arms.is_empty() {
            return Err(domain!("portfolio needs at least one arm"));
        }
        for (i, a) in arms.iter().enumerate() {
            if arms[..i].contains(a) {
                return Err(domain!("portfolio arm {a} listed twice"));
            }
        }
        Ok(Self { arms })
    }

    /// GP-EI, GP-PI, GP-UCB, RF-EI, RF-PI, RF-UCB.
    pub fn default_six(kappa: f64) -> Self {
        let acqs = [AcqKind::Ei, AcqKind::Pi, AcqKind::Ucb { kappa }];
        let arms = [SurrogateKind::Gp, SurrogateKind::Rf]
            .into_iter()
            .flat_map(|surrogate| acqs.into_iter().map(move |acq| Arm { surrogate, acq }))
            .collect();
        Self { arms }
    }

    pub fn single(arm: Arm) -> Self {
        Self { arms: alloc::vec![arm] }
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateStrategy {
    /// Evaluate the colliding configuration anyway.
    Naive,
    /// Replace it with a uniformly random idle candidate.
    Random,
    /// Take the next-best ranked candidate that is not running.
    NextCandidate,
    /// Running evaluations sit in the history with their partial curves, so
    /// the selection already accounts for them.
    #[default]
    InProgress,
}

/// Surrogate settings shared by all arms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelSettings {
    pub gp: GpOptions,
    pub rf: RfOptions,
}

pub(crate) struct TrainingSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Incumbent for improvement-based acquisitions.
    pub best: f64,
}

/// Entries a surrogate may learn from: anything with at least one epoch
/// that is finished, plus running entries when `include_in_progress`.
pub(crate) fn training_set(snapshot: &HistorySnapshot, include_in_progress: bool) -> TrainingSet {
    let usable: Vec<_> = snapshot
        .entries()
        .iter()
        .filter(|e| !e.curve.is_empty() && (include_in_progress || e.status != EntryStatus::InProgress))
        .collect();
    let completed_best = usable
        .iter()
        .filter(|e| e.status == EntryStatus::Complete)
        .map(|e| e.transformed_best)
        .fold(f64::NEG_INFINITY, f64::max);
    let best = if completed_best.is_finite() {
        completed_best
    } else {
        usable.iter().map(|e| e.transformed_best).fold(f64::NEG_INFINITY, f64::max)
    };
    TrainingSet {
        x: usable.iter().map(|e| e.features.0.clone()).collect(),
        y: usable.iter().map(|e| e.transformed_best).collect(),
        best,
    }
}

pub(crate) fn fit_surrogate(
    kind: SurrogateKind,
    data: &TrainingSet,
    models: &ModelSettings,
    seed: u64,
) -> Result<Box<dyn Surrogate>> {
    Ok(match kind {
        SurrogateKind::Gp => Box::new(fit_gp(&data.x, &data.y, &models.gp, seed)?),
        SurrogateKind::Rf => Box::new(fit_rf(&data.x, &data.y, &models.rf, seed)?),
    })
}

/// Pool sorted by acquisition value, best first; ties go to the lower id.
pub(crate) fn rank_pool(
    model: &dyn Surrogate,
    acq: AcqKind,
    pool: &[usize],
    features: &[FeatureVector],
    best: f64,
) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .map(|&id| {
            let v = integrated_acq(acq, &model.predict(&features[id].0), best);
            (if v.is_nan() { f64::NEG_INFINITY } else { v }, id)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, id)| id).collect()
}

/// Cold-start pick: the lowest pool id with no history entry (table ids
/// follow Sobol order), else the lowest pool id.
pub(crate) fn sobol_order_pick(snapshot: &HistorySnapshot, pool: &[usize]) -> Option<usize> {
    let seen: BTreeSet<usize> = snapshot.entries().iter().map(|e| e.config_id).collect();
    pool.iter().copied().find(|id| !seen.contains(id)).or_else(|| pool.iter().copied().min())
}

/// Inputs shared by every selection in a trial.
pub struct SelectionContext<'a> {
    /// Encoded features of every table entry, indexed by id.
    pub features: &'a [FeatureVector],
    pub models: &'a ModelSettings,
    /// Whether running evaluations' partial results feed the surrogate.
    pub include_in_progress: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub candidate: usize,
    /// Pool ranked by the arm's acquisition, best first. Empty on cold start.
    pub ranked: Vec<usize>,
    pub cold_start: bool,
}

/// Fits the arm's surrogate on the usable history and returns the pool
/// candidate with the highest integrated acquisition. With fewer than two
/// usable entries the pick falls back to Sobol order.
pub fn select_candidate(
    arm: Arm,
    snapshot: &HistorySnapshot,
    pool: &[usize],
    ctx: &SelectionContext<'_>,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::ExhaustedPool);
    }
    if pool.len() == 1 {
        return Ok(Selection { candidate: pool[0], ranked: pool.to_vec(), cold_start: false });
    }
    let cold = || {
        sobol_order_pick(snapshot, pool)
            .map(|candidate| Selection { candidate, ranked: Vec::new(), cold_start: true })
            .ok_or(Error::ExhaustedPool)
    };
    let data = training_set(snapshot, ctx.include_in_progress);
    if data.y.len() < 2 {
        return cold();
    }
    let model = match fit_surrogate(arm.surrogate, &data, ctx.models, ctx.seed) {
        Ok(m) => m,
        Err(err) => {
            log::warn!("{arm} fit failed ({err}); falling back to Sobol order");
            return cold();
        }
    };
    let ranked = rank_pool(model.as_ref(), arm.acq, pool, ctx.features, data.best);
    Ok(Selection { candidate: ranked[0], ranked, cold_start: false })
}

/// Resolves a candidate that may already be running on another worker.
pub fn resolve_duplicate<R: Rng + ?Sized>(
    candidate: usize,
    in_flight: &BTreeSet<usize>,
    strategy: DuplicateStrategy,
    ranked: &[usize],
    rng: &mut R,
) -> Result<usize> {
    if !in_flight.contains(&candidate) {
        return Ok(candidate);
    }
    match strategy {
        DuplicateStrategy::Naive | DuplicateStrategy::InProgress => Ok(candidate),
        DuplicateStrategy::Random => {
            let idle: Vec<usize> = ranked.iter().copied().filter(|id| !in_flight.contains(id)).collect();
            if idle.is_empty() {
                return Err(Error::ExhaustedPool);
            }
            Ok(idle[rng.random_range(0..idle.len())])
        }
        DuplicateStrategy::NextCandidate => {
            ranked.iter().copied().find(|id| !in_flight.contains(id)).ok_or(Error::ExhaustedPool)
        }
    }
}
