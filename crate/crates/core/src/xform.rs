//! Hybrid cost transformation applied to accuracies before they enter the
//! shared history.
//!
//! Below the knee `1 - alpha` values pass through unchanged; above it the
//! curve switches to `1 - ln(1 - y) + ln(alpha) - alpha`, which stretches the
//! high-accuracy region where the surrogate needs resolution. The offset makes
//! the two branches meet at the knee.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub const DEFAULT_ALPHA: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    alpha: f64,
}

impl TransformParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(domain!("alpha must lie in (0, 1], got {alpha}"));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn apply(&self, y: f64) -> Result<f64> {
        hybrid_transform(y, self.alpha)
    }
}

impl Default for TransformParams {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA }
    }
}

pub fn hybrid_transform(y: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain!("alpha must lie in (0, 1], got {alpha}"));
    }
    if !(0.0..1.0).contains(&y) {
        return Err(domain!("accuracy must lie in [0, 1), got {y}"));
    }
    if y < 1.0 - alpha {
        Ok(y)
    } else {
        Ok(1.0 - libm::log(1.0 - y) + (libm::log(alpha) - alpha))
    }
}

/// Min-max rescaling of a non-accuracy objective into `[0, 1]`, with the
/// direction flipped for objectives where lower is better (e.g. perplexity).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScaling {
    pub lo: f64,
    pub hi: f64,
    pub minimize: bool,
}

impl ObjectiveScaling {
    pub fn new(lo: f64, hi: f64, minimize: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(domain!("scaling bounds must satisfy lo < hi, got [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi, minimize })
    }

    pub fn scale(&self, value: f64) -> f64 {
        let s = ((value - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        if self.minimize {
            1.0 - s
        } else {
            s
        }
    }
}
