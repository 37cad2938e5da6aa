//! Random-forest regression in the SMAC style: predictive variance is the
//! spread of the individual tree predictions.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Prediction, Surrogate};
use crate::error::{domain, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct RfOptions {
    pub n_trees: usize,
    /// Nodes with fewer samples than this become leaves.
    pub min_split: usize,
    pub bootstrap: bool,
    /// Candidate split dimensions per node; `None` means `⌈D/3⌉`.
    pub max_features: Option<usize>,
}

impl Default for RfOptions {
    fn default() -> Self {
        Self { n_trees: 50, min_split: 2, bootstrap: true, max_features: None }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { value: f64, samples: usize },
    Split { dim: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value, .. } => return value,
                Node::Split { dim, threshold, left, right } => {
                    at = if x[dim] <= threshold { left } else { right };
                }
            }
        }
    }

    fn min_leaf_size(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { samples, .. } => Some(*samples),
                Node::Split { .. } => None,
            })
            .min()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct RfModel {
    trees: Vec<Tree>,
    options: RfOptions,
}

impl RfModel {
    pub fn options(&self) -> &RfOptions {
        &self.options
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Smallest number of training samples held by any leaf in the forest.
    pub fn min_leaf_size(&self) -> usize {
        self.trees.iter().map(Tree::min_leaf_size).min().unwrap_or(0)
    }
}

impl Surrogate for RfModel {
    fn predict(&self, x: &[f64]) -> Vec<Prediction> {
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        let n = preds.len() as f64;
        let mean = preds.iter().sum::<f64>() / n;
        let var = preds.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
        alloc::vec![Prediction { mean, var: var.max(0.0) }]
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    min_split: usize,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    dims: Vec<usize>,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let value = idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(Node::Leaf { value, samples: idx.len() });
        self.nodes.len() - 1
    }

    /// Best variance-reducing split on `dim`: `(sse after split, threshold)`.
    fn best_split_on(&self, idx: &mut [usize], dim: usize) -> Option<(f64, f64)> {
        idx.sort_by(|&a, &b| self.x[a][dim].total_cmp(&self.x[b][dim]).then(a.cmp(&b)));
        let n = idx.len();
        let (total, total_sq) = idx.iter().fold((0.0, 0.0), |(s, q), &i| (s + self.y[i], q + self.y[i] * self.y[i]));
        let (mut left, mut left_sq) = (0.0, 0.0);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..n - 1 {
            let yi = self.y[idx[k]];
            left += yi;
            left_sq += yi * yi;
            let (a, b) = (self.x[idx[k]][dim], self.x[idx[k + 1]][dim]);
            if a == b {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = (n - k - 1) as f64;
            let sse = (left_sq - left * left / nl) + (total_sq - left_sq - (total - left) * (total - left) / nr);
            if best.is_none_or(|(s, _)| sse < s) {
                best = Some((sse, 0.5 * (a + b)));
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize]) -> usize {
        let n = idx.len();
        let (lo, hi) = idx
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(self.y[i]), hi.max(self.y[i])));
        if n < self.min_split || n < 2 || hi <= lo {
            return self.leaf(idx);
        }
        self.dims.shuffle(&mut self.rng);
        let dims = self.dims.clone();
        let mut best: Option<(f64, usize, f64)> = None;
        // look beyond the random subset only if it admits no split at all
        for (k, &dim) in dims.iter().enumerate() {
            if k >= self.max_features && best.is_some() {
                break;
            }
            if let Some((sse, thr)) = self.best_split_on(idx, dim) {
                if best.is_none_or(|(s, _, _)| sse < s) {
                    best = Some((sse, dim, thr));
                }
            }
        }
        let Some((_, dim, threshold)) = best else {
            return self.leaf(idx);
        };
        idx.sort_by(|&a, &b| self.x[a][dim].total_cmp(&self.x[b][dim]).then(a.cmp(&b)));
        let split = idx.partition_point(|&i| self.x[i][dim] <= threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0, samples: 0 });
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l);
        let right = self.build(r);
        self.nodes[at] = Node::Split { dim, threshold, left, right };
        at
    }
}

/// Fits `opts.n_trees` regression trees, each on its own bootstrap resample.
pub fn fit_rf(x: &[Vec<f64>], y: &[f64], opts: &RfOptions, seed: u64) -> Result<RfModel> {
    if x.len() < 2 {
        return Err(domain!("random forest needs at least 2 training points, got {}", x.len()));
    }
    if x.len() != y.len() {
        return Err(domain!("{} inputs but {} targets", x.len(), y.len()));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(domain!("forest inputs must share a non-zero dimension"));
    }
    if opts.n_trees == 0 || opts.min_split < 2 {
        return Err(domain!("forest needs n_trees >= 1 and min_split >= 2"));
    }
    let max_features = opts.max_features.unwrap_or(dim.div_ceil(3)).clamp(1, dim);
    let n = y.len();
    let trees = (0..opts.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed, t as u64));
            let mut idx: Vec<usize> =
                if opts.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            let mut b = Builder {
                x,
                y,
                min_split: opts.min_split,
                max_features,
                rng,
                nodes: Vec::new(),
                dims: (0..dim).collect(),
            };
            b.build(&mut idx);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(RfModel { trees, options: opts.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 12.0, ((i * 7) % 12) as f64 / 12.0]).collect();
        let y = x.iter().map(|r| r[0] * 2.0 - r[1]).collect();
        (x, y)
    }

    #[test]
    fn constant_target() {
        let (x, _) = data();
        let y = vec![0.7; x.len()];
        let m = fit_rf(&x, &y, &RfOptions::default(), 1).unwrap();
        for probe in [[0.0, 0.0], [0.5, 0.3], [2.0, -1.0]] {
            let p = m.predict(&probe)[0];
            assert!((p.mean - 0.7).abs() < 1e-12 && p.var < 1e-24);
        }
    }

    #[test]
    fn memorises_without_bootstrap() {
        let (x, y) = data();
        let opts = RfOptions { bootstrap: false, ..RfOptions::default() };
        let m = fit_rf(&x, &y, &opts, 2).unwrap();
        assert_eq!(m.min_leaf_size(), 1);
        for (xi, yi) in x.iter().zip(&y) {
            let p = m.predict(xi)[0];
            assert!((p.mean - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_and_shaped() {
        let (x, y) = data();
        let a = fit_rf(&x, &y, &RfOptions::default(), 5).unwrap();
        let b = fit_rf(&x, &y, &RfOptions::default(), 5).unwrap();
        assert_eq!(a.n_trees(), 50);
        assert!(a.min_leaf_size() >= 1);
        for probe in [[0.1, 0.9], [0.33, 0.5]] {
            assert_eq!(a.predict(&probe), b.predict(&probe));
        }
        assert!(fit_rf(&x[..1], &y[..1], &RfOptions::default(), 5).is_err());
    }
}
