//! Pure statistical kernel: ranking, hypothesis tests, exact small-sample
//! distributions, and multiple-comparison corrections.
//!
//! Everything here is a deterministic function of its inputs — no RNG, no
//! shared state — so the workflow layer can call it from any thread and
//! identical inputs always produce bit-identical results.

mod correction;
pub(crate) mod dist;
mod friedman;
mod normality;
mod rank;
mod ttests;
mod variance;
mod wilcoxon;

pub use correction::{adjust_pvalues, CorrectionMethod};
pub use friedman::friedman;
pub use normality::{ks_normality, ks_uniform, shapiro_wilk};
pub use rank::{average_ranks, count_wins, rank_rows, Direction, RankMatrix};
pub use ttests::{t_test_paired, welch_t};
pub use variance::{levene, LeveneCenter};
pub use wilcoxon::wilcoxon_signed_rank;


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sample of finite, unitless observations (typically fitness errors).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Validates that `values` is non-empty and all entries are finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("sample must not be empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sample contains non-finite value {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Paired observations measured on the same subjects (same function, same run
/// index); the pairing is positional.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    pairs: Vec<(f64, f64)>,
}

impl PairedSamples {
    /// Validates that there are ≥ 2 pairs and every element is finite.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::SizeError(format!(
                "paired tests need at least 2 pairs, got {}",
                pairs.len()
            )));
        }
        if let Some((a, b)) = pairs.iter().find(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "pair ({a}, {b}) contains a non-finite value"
            )));
        }
        Ok(Self { pairs })
    }

    /// Pairs two equally long slices element-wise.
    pub fn from_slices(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "paired samples must have equal length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        Self::new(a.iter().copied().zip(b.iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Element-wise differences `a − b`.
    pub fn differences(&self) -> Vec<f64> {
        self.pairs.iter().map(|(a, b)| a - b).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Identifies which hypothesis test produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ShapiroWilk,
    KolmogorovSmirnov,
    Levene,
    PairedT,
    WelchT,
    WilcoxonSignedRank,
    Friedman,
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TestMethod::ShapiroWilk => "Shapiro-Wilk",
            TestMethod::KolmogorovSmirnov => "Kolmogorov-Smirnov",
            TestMethod::Levene => "Levene",
            TestMethod::PairedT => "paired Student's t",
            TestMethod::WelchT => "Welch's t",
            TestMethod::WilcoxonSignedRank => "Wilcoxon signed-rank",
            TestMethod::Friedman => "Friedman",
        };
        f.write_str(name)
    }
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    /// Two-sided p-value in `[0, 1]`.
    pub p_value: f64,
    /// Effective sample size actually used by the test.
    pub n: usize,
    /// Human-readable qualifiers: "exact", "normal approximation",
    /// "ties corrected", dropped-zero counts, and so on.
    pub notes: String,
}

impl TestResult {
    pub(crate) fn new(
        method: TestMethod,
        statistic: f64,
        p_value: f64,
        n: usize,
        notes: impl Into<String>,
    ) -> Self {
        debug_assert!((0.0..=1.0).contains(&p_value), "p={p_value}");
        debug_assert!(n >= 1);
        Self {
            method,
            statistic,
            p_value,
            n,
            notes: notes.into(),
        }
    }
}
