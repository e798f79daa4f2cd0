//! Core library for fair, reproducible comparison of stochastic optimizers.
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`benchmark`] — a catalog of scalable test functions plus shift /
//!    rotation / noise transforms with exactly known optima;
//! 2. [`optimizers`] — reference metaheuristics (differential evolution,
//!    success-history adaptation, local search, a hybrid, and deliberately
//!    naive baselines) driven through a budget-counting evaluator;
//! 3. [`harness`] — seeded experiment execution, ablation pairing, CSV
//!    archival, and a structural-bias probe;
//! 4. [`stats`] — the hypothesis-testing kernel (normality, variance,
//!    location, rank tests, and multiplicity corrections);
//! 5. [`workflow`] — the decision procedure that turns raw results into a
//!    defensible comparison (test selection, omnibus gate, post-hoc family);
//! 6. [`tuner`] — racing-based parameter tuning so every algorithm gets the
//!    same configuration effort;
//! 7. [`report`] — deterministic Markdown / JSON / SVG rendering.
//!
//! Determinism is a design invariant: every stochastic component consumes an
//! explicit seed, and repeated runs with the same manifest produce
//! byte-identical artifacts.

pub mod benchmark;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod report;
pub mod stats;
pub mod tuner;
pub mod util;
pub mod workflow;

pub use error::{Error, Result};
