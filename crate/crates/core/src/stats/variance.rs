//! Levene's test for homogeneity of variances across k groups.
//!
//! The statistic is a one-way ANOVA on absolute deviations from a group
//! center. Centering on the mean gives the classical Levene test; centering on
//! the median gives the Brown-Forsythe variant, which is more robust to
//! heavy-tailed data.

use crate::error::{Error, Result};
use crate::stats::dist;
use crate::stats::{Sample, TestMethod, TestResult};
use crate::util;

/// Which location estimate the absolute deviations are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeveneCenter {
    /// Classical Levene test (deviations from the group mean).
    #[default]
    Mean,
    /// Brown-Forsythe variant (deviations from the group median).
    Median,
}

/// Levene's test across `groups`; rejects when spreads differ.
///
/// Requires at least two groups, each with at least two observations. Two
/// degenerate shapes get special handling:
/// - every deviation zero in every group (each group constant) is reported as
///   `DegenerateSample` — spread comparison is meaningless;
/// - zero within-group deviation scatter but identical mean deviations across
///   groups yields W = 0, p = 1 (the groups have indistinguishable spread).
pub fn levene(groups: &[Sample], center: LeveneCenter) -> Result<TestResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::SizeError(format!(
            "Levene's test requires at least 2 groups, got {k}"
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::SizeError(format!(
                "Levene's test requires ≥ 2 observations per group; group {i} has {}",
                g.len()
            )));
        }
    }

    let total_n: usize = groups.iter().map(Sample::len).sum();
    let big_n = total_n as f64;
    let kf = k as f64;

    // Absolute deviations from the chosen center, per group.
    let deviations: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let c = match center {
                LeveneCenter::Mean => util::mean(g.values()),
                LeveneCenter::Median => util::median(g.values()),
            };
            g.values().iter().map(|x| (x - c).abs()).collect()
        })
        .collect();

    let group_means: Vec<f64> = deviations.iter().map(|z| util::mean(z)).collect();
    let grand_mean =
        deviations.iter().flatten().sum::<f64>() / big_n;

    let between: f64 = deviations
        .iter()
        .zip(&group_means)
        .map(|(z, zbar)| z.len() as f64 * (zbar - grand_mean) * (zbar - grand_mean))
        .sum();
    let within: f64 = deviations
        .iter()
        .zip(&group_means)
        .map(|(z, zbar)| z.iter().map(|zi| (zi - zbar) * (zi - zbar)).sum::<f64>())
        .sum();

    if deviations.iter().flatten().all(|&z| z == 0.0) {
        return Err(Error::DegenerateSample(
            "every group is constant; spreads cannot be compared".into(),
        ));
    }
    if within == 0.0 {
        if between == 0.0 {
            // Deviation profiles are flat and identical across groups (for
            // example two arithmetic progressions with the same step).
            return Ok(TestResult::new(
                TestMethod::Levene,
                0.0,
                1.0,
                total_n,
                levene_note(center),
            ));
        }
        return Err(Error::DegenerateSample(
            "zero within-group deviation scatter but unequal spreads; \
             the F statistic is unbounded"
                .into(),
        ));
    }

    let w = ((big_n - kf) / (kf - 1.0)) * between / within;
    let p = dist::f_sf(w, kf - 1.0, big_n - kf);
    Ok(TestResult::new(
        TestMethod::Levene,
        w,
        p,
        total_n,
        levene_note(center),
    ))
}

fn levene_note(center: LeveneCenter) -> &'static str {
    match center {
        LeveneCenter::Mean => "center = mean",
        LeveneCenter::Median => "center = median (Brown-Forsythe)",
    }
}
