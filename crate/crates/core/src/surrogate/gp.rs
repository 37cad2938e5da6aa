//! Gaussian-process regression with an ARD Matérn 5/2 kernel whose
//! hyperparameters are integrated out by Markov-chain sampling.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Prediction, Surrogate};
use crate::error::{domain, Error, Result};
use crate::linalg::Cholesky;
use crate::stats;

const SQRT5: f64 = 2.236_067_977_499_79;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// ARD Matérn 5/2: `θ₀ (1 + √5 r + 5r²/3) exp(-√5 r)` with
/// `r² = Σ ((a_i - b_i) / ℓ_i)²`.
pub fn matern52(a: &[f64], b: &[f64], lengthscales: &[f64], amplitude: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), lengthscales.len());
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(lengthscales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum();
    let r = libm::sqrt(r2);
    amplitude * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * libm::exp(-SQRT5 * r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpHypers {
    pub amplitude: f64,
    pub lengthscales: Vec<f64>,
    pub noise: f64,
}

impl GpHypers {
    fn from_log(z: &[f64]) -> Self {
        let d = z.len() - 2;
        Self {
            amplitude: libm::exp(z[0]),
            lengthscales: z[1..=d].iter().map(|v| libm::exp(*v)).collect(),
            noise: libm::exp(z[d + 1]),
        }
    }
}

/// Sampler and prior settings. Priors are log-normal around the stated
/// medians; the amplitude and noise medians scale with the variance of the
/// training targets.
#[derive(Clone, Debug, PartialEq)]
pub struct GpOptions {
    /// Number of retained hyperparameter samples (K).
    pub samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub lengthscale_median: f64,
    pub noise_ratio_median: f64,
    pub log_sd_lengthscale: f64,
    pub log_sd_amplitude: f64,
    pub log_sd_noise: f64,
    /// Random-walk proposal scale in log space.
    pub proposal_sd: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            samples: 1,
            burn_in: 50,
            thinning: 10,
            lengthscale_median: 0.3,
            noise_ratio_median: 1e-4,
            log_sd_lengthscale: 1.0,
            log_sd_amplitude: 1.0,
            log_sd_noise: 1.5,
            proposal_sd: 0.15,
        }
    }
}

/// One hyperparameter sample with its factorised Gram matrix.
#[derive(Clone, Debug)]
pub struct GpSample {
    hypers: GpHypers,
    chol: Cholesky,
    weights: Vec<f64>,
    jitter: f64,
}

impl GpSample {
    pub fn hypers(&self) -> &GpHypers {
        &self.hypers
    }

    /// Diagonal jitter that was needed on top of the noise term.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }
}

#[derive(Clone, Debug)]
pub struct GpModel {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    prior_mean: f64,
    samples: Vec<GpSample>,
}

fn gram(x: &[f64], n: usize, dim: usize, h: &GpHypers) -> Vec<f64> {
    let mut k = alloc::vec![0.0; n * n];
    for i in 0..n {
        let xi = &x[i * dim..(i + 1) * dim];
        k[i * n + i] = h.amplitude + h.noise;
        for j in 0..i {
            let v = matern52(xi, &x[j * dim..(j + 1) * dim], &h.lengthscales, h.amplitude);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Factorises `K + σ²I`, escalating diagonal jitter from `1e-8·θ₀` by
/// decades up to `1e-4·θ₀`.
fn factorise(k: &mut [f64], n: usize, amplitude: f64) -> Result<(Cholesky, f64)> {
    if let Some(c) = Cholesky::new(k, n) {
        return Ok((c, 0.0));
    }
    let mut jitter = 1e-8 * amplitude;
    let mut added = 0.0;
    while jitter <= 1e-4 * amplitude * (1.0 + 1e-9) {
        for i in 0..n {
            k[i * n + i] += jitter - added;
        }
        added = jitter;
        if let Some(c) = Cholesky::new(k, n) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::SingularKernel { jitter: added })
}

impl GpModel {
    /// Conditions on fixed hyperparameter samples (no sampling).
    pub fn with_hypers(x: &[Vec<f64>], y: &[f64], hypers: Vec<GpHypers>) -> Result<Self> {
        let (dim, flat) = check_data(x, y)?;
        if hypers.is_empty() {
            return Err(domain!("need at least one hyperparameter sample"));
        }
        for h in &hypers {
            let positive = h.amplitude > 0.0 && h.noise > 0.0 && h.lengthscales.iter().all(|l| *l > 0.0);
            if !positive || h.lengthscales.len() != dim {
                return Err(domain!("hyperparameters must be positive with one lengthscale per dimension"));
            }
        }
        let prior_mean = stats::mean(y).unwrap_or(0.0);
        let resid: Vec<f64> = y.iter().map(|v| v - prior_mean).collect();
        let n = y.len();
        let samples = hypers
            .into_iter()
            .map(|h| {
                let mut k = gram(&flat, n, dim, &h);
                let (chol, jitter) = factorise(&mut k, n, h.amplitude)?;
                let weights = chol.solve(&resid);
                Ok(GpSample { hypers: h, chol, weights, jitter })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, x: flat, y: y.to_vec(), prior_mean, samples })
    }

    pub fn samples(&self) -> &[GpSample] {
        &self.samples
    }

    pub fn hyper_samples(&self) -> Vec<GpHypers> {
        self.samples.iter().map(|s| s.hypers.clone()).collect()
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

impl Surrogate for GpModel {
    fn predict(&self, x: &[f64]) -> Vec<Prediction> {
        let n = self.y.len();
        let mut kstar = alloc::vec![0.0; n];
        self.samples
            .iter()
            .map(|s| {
                let h = &s.hypers;
                for (i, k) in kstar.iter_mut().enumerate() {
                    *k = matern52(x, &self.x[i * self.dim..(i + 1) * self.dim], &h.lengthscales, h.amplitude);
                }
                let mean = self.prior_mean + kstar.iter().zip(&s.weights).map(|(a, b)| a * b).sum::<f64>();
                s.chol.solve_lower_in_place(&mut kstar);
                let explained: f64 = kstar.iter().map(|v| v * v).sum();
                Prediction { mean, var: (h.amplitude - explained).max(0.0) }
            })
            .collect()
    }
}

fn check_data(x: &[Vec<f64>], y: &[f64]) -> Result<(usize, Vec<f64>)> {
    if x.len() < 2 {
        return Err(domain!("GP needs at least 2 training points, got {}", x.len()));
    }
    if x.len() != y.len() {
        return Err(domain!("{} inputs but {} targets", x.len(), y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(domain!("GP targets must be finite"));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(domain!("GP inputs must share a non-zero dimension"));
    }
    Ok((dim, x.iter().flatten().copied().collect()))
}

struct Posterior<'a> {
    x: &'a [f64],
    resid: Vec<f64>,
    n: usize,
    dim: usize,
    prior_center: Vec<f64>,
    prior_sd: Vec<f64>,
}

impl Posterior<'_> {
    fn log_density(&self, z: &[f64]) -> f64 {
        let h = GpHypers::from_log(z);
        let mut k = gram(self.x, self.n, self.dim, &h);
        let Ok((chol, _)) = factorise(&mut k, self.n, h.amplitude) else {
            return f64::NEG_INFINITY;
        };
        let alpha = chol.solve(&self.resid);
        let fit: f64 = self.resid.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let lml = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * self.n as f64 * LN_2PI;
        let prior: f64 = z
            .iter()
            .zip(&self.prior_center)
            .zip(&self.prior_sd)
            .map(|((v, c), s)| {
                let t = (v - c) / s;
                -0.5 * t * t
            })
            .sum();
        let lp = lml + prior;
        if lp.is_finite() {
            lp
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Fits a GP by random-walk Metropolis over the log-hyperparameters and keeps
/// `opts.samples` thinned draws after burn-in. Deterministic in `seed`.
pub fn fit_gp(x: &[Vec<f64>], y: &[f64], opts: &GpOptions, seed: u64) -> Result<GpModel> {
    let (dim, flat) = check_data(x, y)?;
    if opts.samples == 0 || opts.thinning == 0 {
        return Err(domain!("GP sampler needs samples >= 1 and thinning >= 1"));
    }
    let n = y.len();
    let mean = stats::mean(y).unwrap_or(0.0);
    let var_y = stats::variance(y).unwrap_or(0.0).max(1e-6);

    let mut center = Vec::with_capacity(dim + 2);
    let mut sd = Vec::with_capacity(dim + 2);
    center.push(libm::log(var_y));
    sd.push(opts.log_sd_amplitude);
    for _ in 0..dim {
        center.push(libm::log(opts.lengthscale_median));
        sd.push(opts.log_sd_lengthscale);
    }
    center.push(libm::log(opts.noise_ratio_median * var_y));
    sd.push(opts.log_sd_noise);

    let post = Posterior {
        x: &flat,
        resid: y.iter().map(|v| v - mean).collect(),
        n,
        dim,
        prior_center: center.clone(),
        prior_sd: sd,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = center;
    let mut lp = post.log_density(&z);
    if !lp.is_finite() {
        return Err(Error::SingularKernel { jitter: 1e-4 * var_y });
    }
    let total = opts.burn_in + opts.thinning * opts.samples;
    let mut kept = Vec::with_capacity(opts.samples);
    let mut proposal = z.clone();
    for step in 1..=total {
        for (p, v) in proposal.iter_mut().zip(&z) {
            let e: f64 = rng.sample(StandardNormal);
            *p = v + opts.proposal_sd * e;
        }
        let lp_new = post.log_density(&proposal);
        let u: f64 = rng.random();
        if lp_new.is_finite() && libm::log(u) < lp_new - lp {
            z.copy_from_slice(&proposal);
            lp = lp_new;
        }
        if step > opts.burn_in && (step - opts.burn_in).is_multiple_of(opts.thinning) {
            kept.push(GpHypers::from_log(&z));
        }
    }
    let model = GpModel::with_hypers(x, y, kept)?;
    debug_assert_eq!(model.x.len(), flat.len());
    Ok(model)
}
