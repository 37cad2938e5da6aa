use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clock::VirtualClock;
use super::history::{EntryStatus, History};
use super::select::{
    fit_surrogate, rank_pool, resolve_duplicate, select_candidate, sobol_order_pick, training_set,
    DuplicateStrategy, ModelSettings, Portfolio, SelectionContext,
};
use crate::acquisition::{AcqKind, HedgeState, DEFAULT_ETA, DEFAULT_KAPPA};
use crate::error::{domain, Error, Result};
use crate::etr::{Decision, EtrPolicy};
use crate::hpspace::FeatureVector;
use crate::seed;
use crate::surrogate::SurrogateKind;
use crate::tabular::SurrogateTable;
use crate::xform::DEFAULT_ALPHA;

/// How each selection is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Algorithm {
    /// Rotate over the arms, one arm per selection.
    Portfolio(Portfolio),
    /// One GP; EI / PI / UCB chosen per selection by Hedge.
    GpHedge { eta: f64, kappa: f64 },
    /// Uniform over the idle pool.
    Random,
}

impl Algorithm {
    pub fn gp_hedge() -> Self {
        Algorithm::GpHedge { eta: DEFAULT_ETA, kappa: DEFAULT_KAPPA }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dispatch {
    /// The next selection goes to whichever worker frees first.
    #[default]
    IdleAny,
    /// Selection `i` always goes to worker `i mod M`, waiting for it if busy.
    Synchronous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialSettings {
    pub algorithm: Algorithm,
    pub workers: usize,
    pub alpha: f64,
    pub etr: EtrPolicy,
    pub duplicates: DuplicateStrategy,
    /// Raw accuracy the run must strictly exceed.
    pub target: f64,
    pub seed: u64,
    /// Virtual seconds; `None` runs until the target is hit or the pool is exhausted.
    pub time_budget: Option<f64>,
    pub dispatch: Dispatch,
    /// Virtual seconds charged per selection for model fitting.
    pub fit_seconds: f64,
    pub models: ModelSettings,
}

impl TrialSettings {
    pub fn new(algorithm: Algorithm, workers: usize, target: f64, seed: u64) -> Self {
        Self {
            algorithm,
            workers,
            alpha: DEFAULT_ALPHA,
            etr: EtrPolicy::none(),
            duplicates: DuplicateStrategy::InProgress,
            target,
            seed,
            time_budget: None,
            dispatch: Dispatch::IdleAny,
            fit_seconds: 0.0,
            models: ModelSettings::default(),
        }
    }

    pub fn validate(&self, table: &SurrogateTable) -> Result<()> {
        if self.workers == 0 {
            return Err(domain!("need at least one worker"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(domain!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.fit_seconds >= 0.0 && self.fit_seconds.is_finite()) {
            return Err(domain!("fit_seconds must be finite and >= 0"));
        }
        if let Some(b) = self.time_budget {
            if !(b > 0.0) {
                return Err(domain!("time budget must be positive"));
            }
        }
        if let Algorithm::GpHedge { eta, kappa } = self.algorithm {
            if !(eta > 0.0 && kappa > 0.0) {
                return Err(domain!("hedge needs eta > 0 and kappa > 0"));
            }
        }
        for c in self.etr.checkpoints() {
            c.validate(table.max_epoch())?;
        }
        if self.target >= table.max_terminal_best() {
            log::warn!(
                "target {} is not below the best accuracy in the table ({}); the trial cannot succeed",
                self.target,
                table.max_terminal_best()
            );
        }
        Ok(())
    }
}

/// Outcome of one optimisation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Virtual seconds until the best accuracy first exceeded the target;
    /// `None` if the budget or pool ran out first.
    pub tau: Option<f64>,
    /// `(virtual time, best raw accuracy so far)` at every improvement.
    pub best_trace: Vec<(f64, f64)>,
    pub evals_started: usize,
    pub evals_terminated: usize,
    pub evals_completed: usize,
    pub in_flight_at_end: usize,
    /// Selections whose top candidate was already running elsewhere.
    pub collisions: usize,
    /// Collisions replaced by a different candidate.
    pub duplicates_resolved: usize,
    pub epochs_trained: usize,
    pub end_time: f64,
    pub seed: u64,
}

impl TrialResult {
    pub fn best_accuracy(&self) -> f64 {
        self.best_trace.last().map_or(0.0, |p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRecord {
    pub index: usize,
    pub time: f64,
    pub worker: usize,
    /// Portfolio arm (or Hedge acquisition) index; `None` for random search.
    pub arm: Option<usize>,
    pub config_id: usize,
    pub collided: bool,
    pub cold_start: bool,
}

#[derive(Clone, Copy, Debug)]
struct Run {
    config_id: usize,
    epochs: usize,
    best: f64,
}

/// Virtual-time simulation of one optimisation run over a table.
pub struct Trial<'a> {
    table: &'a SurrogateTable,
    settings: TrialSettings,
    features: Vec<FeatureVector>,
    history: History,
    clock: VirtualClock,
    workers: Vec<Option<Run>>,
    rng: ChaCha8Rng,
    hedge: HedgeState,
    hedge_nominees: Option<[usize; 3]>,
    selections: Vec<SelectionRecord>,
    result: TrialResult,
    best: f64,
    finished: bool,
}

impl<'a> Trial<'a> {
    pub fn new(table: &'a SurrogateTable, settings: TrialSettings) -> Result<Self> {
        settings.validate(table)?;
        let features = table
            .entries()
            .iter()
            .map(|e| table.space().encode(&e.config.values))
            .collect::<Result<Vec<_>>>()?;
        let eta = match settings.algorithm {
            Algorithm::GpHedge { eta, .. } => eta,
            _ => DEFAULT_ETA,
        };
        Ok(Self {
            table,
            features,
            history: History::new(table.len(), settings.alpha),
            clock: VirtualClock::new(),
            workers: alloc::vec![None; settings.workers],
            rng: ChaCha8Rng::seed_from_u64(seed::mix(settings.seed, 0)),
            hedge: HedgeState::new(eta),
            hedge_nominees: None,
            selections: Vec::new(),
            result: TrialResult {
                tau: None,
                best_trace: Vec::new(),
                evals_started: 0,
                evals_terminated: 0,
                evals_completed: 0,
                in_flight_at_end: 0,
                collisions: 0,
                duplicates_resolved: 0,
                epochs_trained: 0,
                end_time: 0.0,
                seed: settings.seed,
            },
            settings,
            best: 0.0,
            finished: false,
        })
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn selections(&self) -> &[SelectionRecord] {
        &self.selections
    }

    pub fn settings(&self) -> &TrialSettings {
        &self.settings
    }

    /// Ids of configurations that trained to the full epoch budget.
    pub fn survivors(&self) -> Vec<usize> {
        self.history.entries().iter().filter(|e| e.status == EntryStatus::Complete).map(|e| e.config_id).collect()
    }

    /// Runs the simulation to completion and returns the result.
    pub fn run(&mut self) -> Result<TrialResult> {
        if !self.finished {
            self.simulate()?;
            self.finished = true;
        }
        Ok(self.result.clone())
    }

    fn simulate(&mut self) -> Result<()> {
        self.dispatch()?;
        while let Some(next) = self.clock.peek_time() {
            if self.settings.time_budget.is_some_and(|b| next > b) {
                self.result.end_time = self.settings.time_budget.unwrap_or(next);
                break;
            }
            let (now, worker) = self.clock.pop().expect("peeked");
            self.result.end_time = now;
            if self.on_epoch(now, worker)? {
                break;
            }
            self.dispatch()?;
        }
        self.result.in_flight_at_end = self.workers.iter().filter(|w| w.is_some()).count();
        Ok(())
    }

    /// Handles one finished epoch; returns true when the target was reached.
    fn on_epoch(&mut self, now: f64, worker: usize) -> Result<bool> {
        let mut run = self.workers[worker].expect("event for an idle worker");
        let curve = &self.table.curve(run.config_id)?;
        run.epochs += 1;
        let acc = curve.accuracy()[run.epochs - 1];
        run.best = run.best.max(acc);
        self.result.epochs_trained += 1;
        self.history.record_epoch(run.config_id, run.epochs, acc)?;

        if acc > self.best {
            self.best = acc;
            match self.result.best_trace.last_mut() {
                Some(last) if last.0 == now => last.1 = acc,
                _ => self.result.best_trace.push((now, acc)),
            }
        }
        if run.best > self.settings.target {
            self.result.tau = Some(now);
            self.workers[worker] = Some(run);
            return Ok(true);
        }

        let decision = if run.epochs < curve.len() {
            let population = self.etr_population(run.config_id);
            self.settings.etr.decide(run.best, run.epochs, &population)
        } else {
            Decision::Continue
        };
        if decision == Decision::Terminate || run.epochs == curve.len() {
            let completed = decision == Decision::Continue;
            self.history.finish(run.config_id, completed)?;
            if completed {
                self.result.evals_completed += 1;
            } else {
                self.result.evals_terminated += 1;
            }
            self.workers[worker] = None;
        } else {
            self.clock.schedule(now + curve.epoch_seconds()[run.epochs], worker);
            self.workers[worker] = Some(run);
        }
        Ok(false)
    }

    fn include_in_progress(&self) -> bool {
        self.settings.duplicates == DuplicateStrategy::InProgress
    }

    /// Curves of the other history entries an ETR may compare against.
    fn etr_population(&self, exclude: usize) -> Vec<&[f64]> {
        let include_running = self.include_in_progress();
        self.history
            .entries()
            .iter()
            .filter(|e| e.config_id != exclude && (include_running || e.status != EntryStatus::InProgress))
            .map(|e| e.curve.as_slice())
            .collect()
    }

    fn pool(&self) -> Vec<usize> {
        let include_running = self.include_in_progress();
        (0..self.table.len())
            .filter(|&id| match self.history.get(id) {
                None => true,
                Some(e) => e.status == EntryStatus::InProgress && !include_running,
            })
            .collect()
    }

    fn in_flight(&self) -> BTreeSet<usize> {
        self.workers.iter().flatten().map(|r| r.config_id).collect()
    }

    fn dispatch(&mut self) -> Result<()> {
        loop {
            let worker = match self.settings.dispatch {
                Dispatch::IdleAny => match self.workers.iter().position(Option::is_none) {
                    Some(w) => w,
                    None => return Ok(()),
                },
                Dispatch::Synchronous => {
                    let w = self.selections.len() % self.settings.workers;
                    if self.workers[w].is_some() {
                        return Ok(());
                    }
                    w
                }
            };
            match self.select(worker) {
                Ok(()) => {}
                Err(Error::ExhaustedPool) => return Ok(()),
                Err(e) => return Err(e),
            }
        }
    }

    fn select(&mut self, worker: usize) -> Result<()> {
        let index = self.selections.len();
        let now = self.clock.now();
        let pool = self.pool();
        if pool.is_empty() {
            return Err(Error::ExhaustedPool);
        }
        let in_flight = self.in_flight();
        let snapshot = self.history.snapshot();
        let cold_start_len = self.settings.workers.max(2);
        let model_seed = seed::mix(self.settings.seed, 1 + index as u64);

        let (arm, candidate, ranked, cold_start) = match &self.settings.algorithm {
            Algorithm::Random => {
                let idle: Vec<usize> = pool.iter().copied().filter(|id| !in_flight.contains(id)).collect();
                let choices = if idle.is_empty() && self.settings.duplicates == DuplicateStrategy::Naive {
                    &pool
                } else {
                    &idle
                };
                if choices.is_empty() {
                    return Err(Error::ExhaustedPool);
                }
                let pick = choices[self.rng.random_range(0..choices.len())];
                (None, pick, Vec::new(), false)
            }
            _ if index < cold_start_len => {
                let pick = sobol_order_pick(&snapshot, &pool).ok_or(Error::ExhaustedPool)?;
                (self.arm_slot(index), pick, Vec::new(), true)
            }
            Algorithm::Portfolio(portfolio) => {
                let arm_index = index % portfolio.len();
                let arm = portfolio.arms()[arm_index];
                let ctx = SelectionContext {
                    features: &self.features,
                    models: &self.settings.models,
                    include_in_progress: self.include_in_progress(),
                    seed: model_seed,
                };
                let s = select_candidate(arm, &snapshot, &pool, &ctx)?;
                (Some(arm_index), s.candidate, s.ranked, s.cold_start)
            }
            Algorithm::GpHedge { kappa, .. } => {
                let kappa = *kappa;
                match self.hedge_pick(&snapshot, &pool, kappa, model_seed)? {
                    Some((arm, ranked)) => (Some(arm), ranked[0], ranked, false),
                    None => {
                        let pick = sobol_order_pick(&snapshot, &pool).ok_or(Error::ExhaustedPool)?;
                        (None, pick, Vec::new(), true)
                    }
                }
            }
        };

        let collided = in_flight.contains(&candidate);
        let chosen = if collided {
            self.result.collisions += 1;
            let alternatives = if ranked.is_empty() { &pool } else { &ranked };
            let c = resolve_duplicate(candidate, &in_flight, self.settings.duplicates, alternatives, &mut self.rng)?;
            if c != candidate {
                self.result.duplicates_resolved += 1;
            }
            c
        } else {
            candidate
        };

        self.history.begin(chosen, &self.features[chosen])?;
        self.result.evals_started += 1;
        self.workers[worker] = Some(Run { config_id: chosen, epochs: 0, best: 0.0 });
        let first = self.table.curve(chosen)?.epoch_seconds()[0];
        self.clock.schedule(now + self.settings.fit_seconds + first, worker);
        self.selections.push(SelectionRecord {
            index,
            time: now,
            worker,
            arm,
            config_id: chosen,
            collided,
            cold_start,
        });
        Ok(())
    }

    fn arm_slot(&self, index: usize) -> Option<usize> {
        match &self.settings.algorithm {
            Algorithm::Portfolio(p) => Some(index % p.len()),
            _ => None,
        }
    }

    /// GP-Hedge: credit each acquisition with the current posterior mean at
    /// its previous nominee, then draw one acquisition. Returns the chosen
    /// acquisition index and its ranking, or `None` when the GP cannot be fit.
    fn hedge_pick(
        &mut self,
        snapshot: &super::history::HistorySnapshot,
        pool: &[usize],
        kappa: f64,
        model_seed: u64,
    ) -> Result<Option<(usize, Vec<usize>)>> {
        let data = training_set(snapshot, self.include_in_progress());
        if data.y.len() < 2 {
            return Ok(None);
        }
        let model = match fit_surrogate(SurrogateKind::Gp, &data, &self.settings.models, model_seed) {
            Ok(m) => m,
            Err(err) => {
                log::warn!("GP-Hedge fit failed ({err}); falling back to Sobol order");
                return Ok(None);
            }
        };
        if let Some(prev) = self.hedge_nominees {
            let rewards = prev.map(|id| {
                let preds = model.predict(&self.features[id].0);
                preds.iter().map(|p| p.mean).sum::<f64>() / preds.len() as f64
            });
            self.hedge.update(rewards);
        }
        let acqs = [AcqKind::Ei, AcqKind::Pi, AcqKind::Ucb { kappa }];
        let mut rankings: Vec<Vec<usize>> =
            acqs.iter().map(|&a| rank_pool(model.as_ref(), a, pool, &self.features, data.best)).collect();
        self.hedge_nominees = Some([rankings[0][0], rankings[1][0], rankings[2][0]]);
        let arm = self.hedge.select(&mut self.rng);
        Ok(Some((arm, rankings.swap_remove(arm))))
    }
}

/// Simulates one optimisation run; see [`Trial`].
pub fn run_trial(table: &SurrogateTable, settings: TrialSettings) -> Result<TrialResult> {
    Trial::new(table, settings)?.run()
}
