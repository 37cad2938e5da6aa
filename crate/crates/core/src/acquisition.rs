//! Acquisition functions (maximisation convention) and the GP-Hedge bandit
//! used by the portfolio baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stats::{normal_cdf, normal_pdf};
use crate::surrogate::Prediction;

pub const DEFAULT_KAPPA: f64 = 2.0;
pub const DEFAULT_ETA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum AcqKind {
    Ei,
    Pi,
    Ucb { kappa: f64 },
}

impl AcqKind {
    pub fn ucb() -> Self {
        AcqKind::Ucb { kappa: DEFAULT_KAPPA }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AcqKind::Ei => "EI",
            AcqKind::Pi => "PI",
            AcqKind::Ucb { .. } => "UCB",
        }
    }

    pub fn evaluate(&self, mean: f64, var: f64, best: f64) -> f64 {
        match *self {
            AcqKind::Ei => ei(mean, var, best),
            AcqKind::Pi => pi(mean, var, best),
            AcqKind::Ucb { kappa } => ucb(mean, var, kappa),
        }
    }
}

/// Expected improvement over `best`.
pub fn ei(mean: f64, var: f64, best: f64) -> f64 {
    let sigma = libm::sqrt(var.max(0.0));
    if sigma == 0.0 {
        return (mean - best).max(0.0);
    }
    let z = (mean - best) / sigma;
    (sigma * (z * normal_cdf(z) + normal_pdf(z))).max(0.0)
}

/// Probability of improving on `best`.
pub fn pi(mean: f64, var: f64, best: f64) -> f64 {
    let sigma = libm::sqrt(var.max(0.0));
    if sigma == 0.0 {
        return if mean > best { 1.0 } else { 0.0 };
    }
    normal_cdf((mean - best) / sigma)
}

pub fn ucb(mean: f64, var: f64, kappa: f64) -> f64 {
    mean + kappa * libm::sqrt(var.max(0.0))
}

/// Acquisition averaged over the per-sample predictions of a surrogate.
pub fn integrated_acq(kind: AcqKind, predictions: &[Prediction], best: f64) -> f64 {
    if predictions.is_empty() {
        return f64::NAN;
    }
    predictions.iter().map(|p| kind.evaluate(p.mean, p.var, best)).sum::<f64>() / predictions.len() as f64
}

/// Hedge over the three acquisition arms (EI, PI, UCB).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedgeState {
    pub gains: [f64; 3],
    pub eta: f64,
}

impl HedgeState {
    pub fn new(eta: f64) -> Self {
        assert!(eta > 0.0, "hedge temperature must be positive");
        Self { gains: [0.0; 3], eta }
    }

    /// Softmax of `eta * gains`, shifted by the max for stability.
    pub fn probabilities(&self) -> [f64; 3] {
        let top = self.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w = self.gains.map(|g| libm::exp(self.eta * (g - top)));
        let total: f64 = w.iter().sum();
        w.map(|v| v / total)
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let p = self.probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                return i;
            }
        }
        2
    }

    pub fn update(&mut self, rewards: [f64; 3]) {
        for (g, r) in self.gains.iter_mut().zip(rewards) {
            *g += r;
        }
    }
}

impl Default for HedgeState {
    fn default() -> Self {
        Self::new(DEFAULT_ETA)
    }
}
