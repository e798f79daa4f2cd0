//! The function catalog: ten classic scalable objectives with exactly known
//! optima.
//!
//! Every base form is written so that evaluation at the base optimum returns
//! `0.0` *exactly* in floating point (for example Rastrigin's per-term
//! `x² − 10·cos(2πx) + 10` is computed as `x² + 10·(1 − cos(2πx))`, which is
//! structurally zero at the origin instead of relying on `10 − 10` style
//! cancellation after a rounded cosine). This is what makes the "error equals
//! zero at the optimum" contract of the whole toolkit exact rather than
//! approximate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature tags used for grouped analysis and radar charts.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Separable,
    Unimodal,
    Multimodal,
    Shifted,
    Rotated,
    Noisy,
}

impl Tag {
    /// Every tag, in display order.
    pub const ALL: [Tag; 6] = [
        Tag::Separable,
        Tag::Unimodal,
        Tag::Multimodal,
        Tag::Shifted,
        Tag::Rotated,
        Tag::Noisy,
    ];

    /// Stable machine identifier (matches the serde encoding).
    pub fn key(self) -> &'static str {
        match self {
            Tag::Separable => "separable",
            Tag::Unimodal => "unimodal",
            Tag::Multimodal => "multimodal",
            Tag::Shifted => "shifted",
            Tag::Rotated => "rotated",
            Tag::Noisy => "noisy",
        }
    }

    /// Parses a tag key; the error lists every valid name.
    pub fn parse(name: &str) -> Result<Tag> {
        Tag::ALL.iter().copied().find(|t| t.key() == name).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown tag '{name}'; valid tags: {}",
                Tag::ALL.iter().map(|t| t.key()).collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

/// A catalog entry: one of the ten classic scalable test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    Sphere,
    Schwefel221,
    Rosenbrock,
    Rastrigin,
    Griewank,
    Ackley,
    Schwefel222,
    Schwefel12,
    Bohachevsky,
    Schaffer,
}

/// Catalog order is fixed; suites and reports list functions in this order
/// unless the caller specifies otherwise.
pub const CATALOG: [BaseFunction; 10] = [
    BaseFunction::Sphere,
    BaseFunction::Schwefel221,
    BaseFunction::Rosenbrock,
    BaseFunction::Rastrigin,
    BaseFunction::Griewank,
    BaseFunction::Ackley,
    BaseFunction::Schwefel222,
    BaseFunction::Schwefel12,
    BaseFunction::Bohachevsky,
    BaseFunction::Schaffer,
];

impl BaseFunction {
    /// Stable machine identifier (used in manifests, CSV, and report keys).
    pub fn key(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Schwefel221 => "schwefel_2_21",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Schwefel222 => "schwefel_2_22",
            BaseFunction::Schwefel12 => "schwefel_1_2",
            BaseFunction::Bohachevsky => "bohachevsky",
            BaseFunction::Schaffer => "schaffer",
        }
    }

    /// Human-readable name for tables and charts.
    pub fn display_name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "Sphere",
            BaseFunction::Schwefel221 => "Schwefel 2.21",
            BaseFunction::Rosenbrock => "Rosenbrock",
            BaseFunction::Rastrigin => "Rastrigin",
            BaseFunction::Griewank => "Griewank",
            BaseFunction::Ackley => "Ackley",
            BaseFunction::Schwefel222 => "Schwefel 2.22",
            BaseFunction::Schwefel12 => "Schwefel 1.2",
            BaseFunction::Bohachevsky => "Bohachevsky",
            BaseFunction::Schaffer => "Schaffer",
        }
    }

    /// Classic symmetric search interval, identical in every dimension.
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            BaseFunction::Sphere | BaseFunction::Schwefel221 | BaseFunction::Rosenbrock => {
                (-100.0, 100.0)
            }
            BaseFunction::Rastrigin => (-5.0, 5.0),
            BaseFunction::Griewank => (-600.0, 600.0),
            BaseFunction::Ackley => (-32.0, 32.0),
            BaseFunction::Schwefel222 => (-10.0, 10.0),
            BaseFunction::Schwefel12 => (-65.536, 65.536),
            BaseFunction::Bohachevsky => (-15.0, 15.0),
            BaseFunction::Schaffer => (-100.0, 100.0),
        }
    }

    /// Smallest dimension for which the definition is meaningful (pairwise
    /// forms need two coordinates).
    pub fn min_dimension(self) -> usize {
        match self {
            BaseFunction::Rosenbrock
            | BaseFunction::Schwefel12
            | BaseFunction::Bohachevsky
            | BaseFunction::Schaffer => 2,
            _ => 1,
        }
    }

    /// Location of the global optimum of the *base* (untransformed) form.
    pub fn base_optimum(self, dimension: usize) -> Vec<f64> {
        match self {
            BaseFunction::Rosenbrock => vec![1.0; dimension],
            _ => vec![0.0; dimension],
        }
    }

    /// Structural feature tags of the base form.
    pub fn base_tags(self) -> &'static [Tag] {
        match self {
            BaseFunction::Sphere => &[Tag::Separable, Tag::Unimodal],
            BaseFunction::Schwefel221 => &[Tag::Unimodal],
            BaseFunction::Rosenbrock => &[Tag::Unimodal],
            BaseFunction::Rastrigin => &[Tag::Separable, Tag::Multimodal],
            BaseFunction::Griewank => &[Tag::Multimodal],
            BaseFunction::Ackley => &[Tag::Multimodal],
            BaseFunction::Schwefel222 => &[Tag::Unimodal],
            BaseFunction::Schwefel12 => &[Tag::Unimodal],
            BaseFunction::Bohachevsky => &[Tag::Multimodal],
            BaseFunction::Schaffer => &[Tag::Multimodal],
        }
    }

    /// Parses a catalog key; the error lists every valid name.
    pub fn parse(name: &str) -> Result<BaseFunction> {
        CATALOG
            .iter()
            .copied()
            .find(|f| f.key() == name)
            .ok_or_else(|| Error::UnknownFunction {
                name: name.to_string(),
                valid: CATALOG.iter().map(|f| f.key()).collect::<Vec<_>>().join(", "),
            })
    }

    /// Raw value of the base form at `z` (already shifted/rotated space).
    ///
    /// Exactly `0.0` at [`BaseFunction::base_optimum`].
    pub fn eval(self, z: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match self {
            BaseFunction::Sphere => z.iter().map(|x| x * x).sum(),
            BaseFunction::Schwefel221 => z.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            BaseFunction::Rosenbrock => z
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = w[0] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
            BaseFunction::Rastrigin => z
                .iter()
                .map(|x| x * x + 10.0 * (1.0 - (2.0 * PI * x).cos()))
                .sum(),
            BaseFunction::Griewank => {
                let sum: f64 = z.iter().map(|x| x * x).sum();
                let prod: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (x / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum / 4000.0 + (1.0 - prod)
            }
            BaseFunction::Ackley => {
                let n = z.len() as f64;
                let mean_sq: f64 = z.iter().map(|x| x * x).sum::<f64>() / n;
                let mean_cos: f64 = z.iter().map(|x| (2.0 * PI * x).cos()).sum::<f64>() / n;
                (20.0 - 20.0 * (-0.2 * mean_sq.sqrt()).exp()) + (1.0f64.exp() - mean_cos.exp())
            }
            BaseFunction::Schwefel222 => {
                let sum: f64 = z.iter().map(|x| x.abs()).sum();
                let prod: f64 = z.iter().map(|x| x.abs()).product();
                sum + prod
            }
            BaseFunction::Schwefel12 => {
                let mut prefix = 0.0;
                let mut total = 0.0;
                for x in z {
                    prefix += x;
                    total += prefix * prefix;
                }
                total
            }
            BaseFunction::Bohachevsky => z
                .windows(2)
                .map(|w| {
                    w[0] * w[0]
                        + 2.0 * w[1] * w[1]
                        + 0.3 * (1.0 - (3.0 * PI * w[0]).cos())
                        + 0.4 * (1.0 - (4.0 * PI * w[1]).cos())
                })
                .sum(),
            BaseFunction::Schaffer => z
                .windows(2)
                .map(|w| {
                    let s = w[0] * w[0] + w[1] * w[1];
                    s.powf(0.25) * ((50.0 * s.powf(0.1)).sin().powi(2) + 1.0)
                })
                .sum(),
        }
    }
}

impl std::fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}
