//! Wilcoxon signed-rank test for paired samples (two-sided).
//!
//! Zero differences are dropped (Wilcoxon's original treatment); absolute
//! differences are ranked with mean ranks for ties. The reported statistic is
//! `W = min(W⁺, W⁻)`. The p-value is exact — computed from the full null
//! distribution of the rank sum via dynamic programming — whenever there are
//! no ties and at most 25 effective pairs; otherwise it falls back to the
//! normal approximation with tie correction and continuity correction. The
//! `notes` field records which path was taken.

use crate::error::{Error, Result};
use crate::stats::dist;
use crate::stats::{PairedSamples, TestMethod, TestResult};

/// Largest effective sample size for which the exact null distribution is
/// enumerated (2^25 sign assignments, counted by DP rather than enumeration).
const EXACT_LIMIT: usize = 25;

/// Two-sided Wilcoxon signed-rank test on paired observations.
pub fn wilcoxon_signed_rank(pairs: &PairedSamples) -> Result<TestResult> {
    let diffs: Vec<f64> = pairs.differences();
    let zeros = diffs.iter().filter(|&&d| d == 0.0).count();
    let kept: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = kept.len();
    if n == 0 {
        return Err(Error::DegenerateSample(
            "all paired differences are zero; the signed-rank statistic is undefined".into(),
        ));
    }

    // Rank |d| with mean ranks for ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| kept[i].abs().total_cmp(&kept[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut tie_sizes: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && kept[order[j + 1]].abs() == kept[order[i]].abs() {
            j += 1;
        }
        let mean_rank = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        if j > i {
            tie_sizes.push(j - i + 1);
        }
        i = j + 1;
    }

    let w_plus: f64 = kept
        .iter()
        .zip(&ranks)
        .filter(|(&d, _)| d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let has_ties = !tie_sizes.is_empty();
    let (p, mut notes) = if !has_ties && n <= EXACT_LIMIT {
        (exact_p(w, n), "exact (signed-rank null distribution)".to_string())
    } else {
        let nf = n as f64;
        let mu = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = tie_sizes
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / 48.0;
        let sigma2 = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if sigma2 <= 0.0 {
            return Err(Error::DegenerateSample(
                "tie correction removes all signed-rank variance".into(),
            ));
        }
        let z = (w - mu + 0.5) / sigma2.sqrt();
        let p = (2.0 * dist::normal_cdf(z)).clamp(0.0, 1.0);
        (p, "normal approximation with continuity correction".to_string())
    };
    if zeros > 0 {
        notes.push_str(&format!("; dropped {zeros} zero difference(s)"));
    }

    Ok(TestResult::new(TestMethod::WilcoxonSignedRank, w, p, n, notes))
}

/// Exact two-sided p-value: `min(1, 2·P(W⁺ ≤ w))` under the null where each of
/// the 2ⁿ sign assignments is equally likely. The distribution of W⁺ over
/// untied ranks 1..n is built by subset-sum DP with exact u64 counts.
fn exact_p(w: f64, n: usize) -> f64 {
    let max_sum = n * (n + 1) / 2;
    let mut counts = vec![0u64; max_sum + 1];
    counts[0] = 1;
    for rank in 1..=n {
        for s in (rank..=max_sum).rev() {
            counts[s] += counts[s - rank];
        }
    }
    let w_floor = w as usize; // untied ranks make W a non-negative integer
    let tail: u64 = counts[..=w_floor.min(max_sum)].iter().sum();
    let two_sided = 2.0 * tail as f64 / 2.0f64.powi(n as i32);
    two_sided.min(1.0)
}
