use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hpspace::FeatureVector;
use crate::xform::hybrid_transform;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    InProgress,
    Terminated,
    Complete,
}

/// One configuration's record in the shared history.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryEntry {
    pub config_id: usize,
    pub features: FeatureVector,
    /// Hybrid transform of the best accuracy in `curve` (0 before any epoch).
    pub transformed_best: f64,
    pub curve: Vec<f64>,
    pub status: EntryStatus,
    active_runs: usize,
}

impl HistoryEntry {
    pub fn best_raw(&self) -> f64 {
        self.curve.iter().copied().fold(0.0, f64::max)
    }

    /// Number of evaluations of this configuration currently running.
    pub fn active_runs(&self) -> usize {
        self.active_runs
    }
}

/// The global shared history, at most one entry per configuration.
#[derive(Clone, Debug)]
pub struct History {
    alpha: f64,
    entries: Vec<HistoryEntry>,
    slot: Vec<Option<usize>>,
}

/// Point-in-time copy of the history; later updates do not show through.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistorySnapshot {
    entries: Vec<HistoryEntry>,
}

impl HistorySnapshot {
    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, config_id: usize) -> Option<&HistoryEntry> {
        self.entries.iter().find(|e| e.config_id == config_id)
    }
}

impl History {
    pub fn new(table_len: usize, alpha: f64) -> Self {
        Self { alpha, entries: Vec::new(), slot: alloc::vec![None; table_len] }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, config_id: usize) -> Option<&HistoryEntry> {
        self.slot.get(config_id).copied().flatten().map(|i| &self.entries[i])
    }

    pub fn snapshot(&self) -> HistorySnapshot {
        HistorySnapshot { entries: self.entries.clone() }
    }

    fn entry_mut(&mut self, config_id: usize) -> Result<&mut HistoryEntry> {
        let i = self.slot.get(config_id).copied().flatten().ok_or(Error::UnknownId(config_id))?;
        Ok(&mut self.entries[i])
    }

    /// Registers a new evaluation of `config_id`.
    pub(crate) fn begin(&mut self, config_id: usize, features: &FeatureVector) -> Result<()> {
        match self.slot.get(config_id).copied() {
            None => Err(Error::UnknownId(config_id)),
            Some(Some(i)) => {
                let e = &mut self.entries[i];
                e.active_runs += 1;
                Ok(())
            }
            Some(None) => {
                self.slot[config_id] = Some(self.entries.len());
                self.entries.push(HistoryEntry {
                    config_id,
                    features: features.clone(),
                    transformed_best: 0.0,
                    curve: Vec::new(),
                    status: EntryStatus::InProgress,
                    active_runs: 1,
                });
                Ok(())
            }
        }
    }

    /// Records epoch `epoch` (1-based). Re-observed epochs from a duplicate
    /// run leave the curve unchanged.
    pub(crate) fn record_epoch(&mut self, config_id: usize, epoch: usize, accuracy: f64) -> Result<()> {
        let alpha = self.alpha;
        let e = self.entry_mut(config_id)?;
        if epoch == e.curve.len() + 1 {
            e.curve.push(accuracy);
            e.transformed_best = hybrid_transform(e.best_raw(), alpha)?;
        }
        Ok(())
    }

    /// Ends one evaluation. The entry becomes `Complete` as soon as any run
    /// finishes all epochs, `Terminated` when its last run was stopped early.
    pub(crate) fn finish(&mut self, config_id: usize, completed: bool) -> Result<()> {
        let alpha = self.alpha;
        let e = self.entry_mut(config_id)?;
        e.active_runs = e.active_runs.saturating_sub(1);
        if e.status == EntryStatus::InProgress {
            if completed {
                e.status = EntryStatus::Complete;
            } else if e.active_runs == 0 {
                e.status = EntryStatus::Terminated;
            }
        }
        // replace any premature value with the one from the final curve
        e.transformed_best = hybrid_transform(e.best_raw(), alpha)?;
        Ok(())
    }
}
