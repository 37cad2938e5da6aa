//! Aggregation of repeated trials: success rate P(τ ≤ t), expected
//! time-to-target, diversity and parallelisation gains, and a rank-sum test
//! for comparing two sets of run times.

use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::TrialResult;
use crate::error::{domain, Error, Result};
use crate::stats::normal_cdf;

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Time-to-target of each run of one experimental setting, in seconds;
/// `None` marks a censored run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialEnsemble {
    taus: Vec<Option<f64>>,
    target: f64,
    fingerprint: String,
}

impl TrialEnsemble {
    pub fn new(taus: Vec<Option<f64>>, target: f64, fingerprint: impl Into<String>) -> Result<Self> {
        if taus.is_empty() {
            return Err(domain!("ensemble needs at least one trial"));
        }
        Ok(Self { taus, target, fingerprint: fingerprint.into() })
    }

    pub fn from_results(results: &[TrialResult], target: f64, fingerprint: impl Into<String>) -> Result<Self> {
        Self::new(results.iter().map(|r| r.tau).collect(), target, fingerprint)
    }

    pub fn taus(&self) -> &[Option<f64>] {
        &self.taus
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn censored(&self) -> usize {
        self.taus.iter().filter(|t| t.is_none()).count()
    }

    /// Fraction of runs that reached the target within `t` seconds.
    pub fn success_rate(&self, t: f64) -> f64 {
        let hits = self.taus.iter().filter(|tau| tau.is_some_and(|tau| tau <= t)).count();
        hits as f64 / self.taus.len() as f64
    }

    /// Mean and population standard deviation of τ in hours over the
    /// non-censored runs.
    pub fn expected_time(&self) -> Result<ExpectedTime> {
        let hours: Vec<f64> = self.taus.iter().flatten().map(|t| t / SECONDS_PER_HOUR).collect();
        if hours.is_empty() {
            return Err(Error::UndefinedMetric("every trial was censored".into()));
        }
        let n = hours.len() as f64;
        let mean = hours.iter().sum::<f64>() / n;
        let var = hours.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>() / n;
        Ok(ExpectedTime { mean_hours: mean, std_hours: libm::sqrt(var), censored: self.censored() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedTime {
    pub mean_hours: f64,
    pub std_hours: f64,
    pub censored: usize,
}

/// Success probability of `workers` independent runs, each succeeding with
/// probability `s`: `1 - (1 - s)^M`.
pub fn theoretical_diversity(s: f64, workers: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) || workers == 0 {
        return Err(domain!("need s in [0, 1] and M >= 1, got s={s}, M={workers}"));
    }
    Ok(1.0 - libm::pow(1.0 - s, workers as f64))
}

/// Expected-time speed-up of `M` workers normalised by `M`; 1.0 is linear.
pub fn parallel_gain(single: f64, parallel: f64, workers: usize) -> Result<f64> {
    if !(single > 0.0 && parallel > 0.0) || workers == 0 {
        return Err(domain!("expected times and worker count must be positive"));
    }
    Ok(single / (workers as f64 * parallel))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSum {
    /// Mann–Whitney U of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for "the first sample tends to be smaller".
    pub p_less: f64,
    pub p_two_sided: f64,
}

/// Wilcoxon rank-sum / Mann–Whitney U test with mid-ranks for ties and the
/// normal approximation (tie-corrected variance, continuity correction).
/// Infinite values are allowed and rank last, which is how censored runs are
/// usually entered.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSum> {
    if a.is_empty() || b.is_empty() {
        return Err(domain!("rank-sum test needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(domain!("rank-sum test samples must not contain NaN"));
    }
    let mut all: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut rank_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_a += all[i..=j].iter().filter(|x| x.1).count() as f64 * mid;
        i = j + 1;
    }
    let u = rank_a - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let nf = n as f64;
    let var = n1 * n2 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Ok(RankSum { u, z: 0.0, p_less: 1.0, p_two_sided: 1.0 });
    }
    let sd = libm::sqrt(var);
    let z = (u - mu) / sd;
    let p_less = normal_cdf((u - mu + 0.5) / sd);
    let p_two = (2.0 * normal_cdf(-((u - mu).abs() - 0.5).max(0.0) / sd)).min(1.0);
    Ok(RankSum { u, z, p_less, p_two_sided: p_two })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn hours(v: &[Option<f64>]) -> Vec<Option<f64>> {
        v.iter().map(|t| t.map(|h| h * SECONDS_PER_HOUR)).collect()
    }

    #[test]
    fn success_rate_examples() {
        let e = TrialEnsemble::new(vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0), None], 0.9, "x").unwrap();
        assert_eq!(e.success_rate(2.0), 0.4);
        assert_eq!(e.success_rate(0.0), 0.0);
        assert_eq!(e.success_rate(f64::INFINITY), 0.8);
    }

    #[test]
    fn expected_time_examples() {
        let e = TrialEnsemble::new(hours(&[Some(2.0), Some(4.0)]), 0.9, "x").unwrap();
        let t = e.expected_time().unwrap();
        assert!((t.mean_hours - 3.0).abs() < 1e-12 && (t.std_hours - 1.0).abs() < 1e-12);
        let e = TrialEnsemble::new(hours(&[Some(5.0)]), 0.9, "x").unwrap();
        assert_eq!(e.expected_time().unwrap().std_hours, 0.0);
        let e = TrialEnsemble::new(hours(&[Some(2.0), Some(4.0), None]), 0.9, "x").unwrap();
        let t = e.expected_time().unwrap();
        assert_eq!((t.mean_hours, t.censored), (3.0, 1));
        let e = TrialEnsemble::new(vec![None, None], 0.9, "x").unwrap();
        assert!(matches!(e.expected_time(), Err(Error::UndefinedMetric(_))));
        assert!(TrialEnsemble::new(vec![], 0.9, "x").is_err());
    }

    #[test]
    fn diversity_and_gain_examples() {
        assert_eq!(theoretical_diversity(0.0, 6).unwrap(), 0.0);
        assert_eq!(theoretical_diversity(0.37, 1).unwrap(), 0.37);
        assert!((theoretical_diversity(0.5, 6).unwrap() - 0.984_375).abs() < 1e-15);
        assert_eq!(parallel_gain(12.0, 2.0, 6).unwrap(), 1.0);
        assert!((parallel_gain(10.7, 2.0, 6).unwrap() - 0.891_666_666_666_666_7).abs() < 1e-12);
        assert_eq!(parallel_gain(6.0, 6.0, 1).unwrap(), 1.0);
        assert!(parallel_gain(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn rank_sum_separates_shifted_samples() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..20).map(|i| i as f64 + 15.0).collect();
        let r = rank_sum_test(&a, &b).unwrap();
        assert!(r.p_less < 1e-4);
        let r = rank_sum_test(&b, &a).unwrap();
        assert!(r.p_less > 0.99);
        let r = rank_sum_test(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn rank_sum_matches_reference_u() {
        // U counts pairs with a > b, ties as one half.
        let a = [1.0, 3.0, 5.0];
        let b = [2.0, 4.0, 6.0, 7.0];
        let direct: f64 = a
            .iter()
            .map(|x| b.iter().map(|y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 }).sum::<f64>())
            .sum();
        assert_eq!(rank_sum_test(&a, &b).unwrap().u, direct);
    }
}
