//! Differentially private multi-table database synthesis.
//!
//! A database is modeled per table by a binary tree whose sum nodes mix
//! private row clusters, whose product nodes factor low-correlation column
//! groups, and whose leaves hold Laplace-perturbed histograms. Foreign-key
//! multiplicities are captured by perturbed fanout tables attached beside the
//! leaves of the attribute with the most of them. Sampling the trees is pure
//! post-processing, so the synthetic database inherits the construction's
//! privacy guarantee. Fidelity is scored by lambda-way KL divergence and by
//! Q-error over generated conjunctive join workloads.
//!
//! Data-parallel sections (table builds, candidate scoring, marginal and
//! query evaluation) use rayon when the default `parallel` feature is on and
//! fall back to sequential loops without it; results are identical either
//! way.

pub mod datamodel;
pub mod dpcore;
pub mod error;
pub mod eval;
pub mod parallel;
pub mod pipeline;
pub mod sampler;
pub mod spn;
pub mod split;
pub mod stats;

pub use error::{Error, Result};
