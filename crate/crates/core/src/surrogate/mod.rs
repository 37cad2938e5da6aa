//! Probabilistic response-surface models over encoded configurations.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

mod gp;
mod rf;

pub use gp::{fit_gp, matern52, GpHypers, GpModel, GpOptions, GpSample};
pub use rf::{fit_rf, RfModel, RfOptions};

/// Posterior mean and variance at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub var: f64,
}

/// A fitted surrogate. GPs return one prediction per hyperparameter sample,
/// forests return a single one.
pub trait Surrogate {
    fn predict(&self, x: &[f64]) -> Vec<Prediction>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateKind {
    Gp,
    Rf,
}
