//! Diversified, early-terminating, parallel Bayesian optimization over
//! pre-evaluated (tabular) benchmarks.
//!
//! The crate is `no_std` + `alloc`. Everything here is pure computation:
//! search spaces and Sobol sampling, the surrogate table model, the hybrid
//! cost transform, GP / random-forest surrogates, acquisition functions,
//! early-termination rules, the virtual-time optimization loop and the
//! metrics used to compare runs. File formats and the command line live in
//! the `deepbo` companion crate.
//!
//! ```
//! use deepbo_core::xform::hybrid_transform;
//!
//! assert_eq!(hybrid_transform(0.5, 0.3).unwrap(), 0.5);
//! assert!((hybrid_transform(0.9, 0.3).unwrap() - 1.798612).abs() < 1e-6);
//! ```
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod acquisition;
pub mod engine;
pub mod error;
pub mod etr;
pub mod hpspace;
pub mod linalg;
pub mod metrics;
pub mod sobol;
pub mod stats;
pub mod surrogate;
pub mod tabular;
pub mod xform;

mod seed;

pub use error::{Error, Result};
