//! Discrete-event simulation of asynchronous parallel Bayesian optimisation
//! over a surrogate table.

mod clock;
mod history;
mod select;
mod trial;

pub use clock::VirtualClock;
pub use history::{EntryStatus, History, HistoryEntry, HistorySnapshot};
pub use select::{
    resolve_duplicate, select_candidate, Arm, DuplicateStrategy, ModelSettings, Portfolio, Selection,
    SelectionContext,
};
pub use trial::{run_trial, Algorithm, Dispatch, SelectionRecord, Trial, TrialResult, TrialSettings};
