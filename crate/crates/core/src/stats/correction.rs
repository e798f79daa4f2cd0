//! Multiple-comparison corrections for families of p-values.
//!
//! All four procedures control the family-wise error rate under the usual
//! assumptions and return *adjusted* p-values (compare directly against α):
//! Bonferroni-Dunn (single-step), Holm (step-down), Hochberg (step-up) and
//! Hommel. Power increases in that order; every Hommel-adjusted value is ≤
//! the corresponding Hochberg value, which is ≤ Holm, which is ≤ Bonferroni.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family-wise error rate correction procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    /// Single-step `min(1, m·p)`.
    BonferroniDunn,
    /// Step-down: the classic default for control-vs-all comparisons.
    #[default]
    Holm,
    /// Step-up; valid under nonnegative dependence.
    Hochberg,
    /// Closure-based; uniformly at least as powerful as Hochberg.
    Hommel,
}

impl std::fmt::Display for CorrectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CorrectionMethod::BonferroniDunn => "Bonferroni-Dunn",
            CorrectionMethod::Holm => "Holm",
            CorrectionMethod::Hochberg => "Hochberg",
            CorrectionMethod::Hommel => "Hommel",
        };
        f.write_str(name)
    }
}

/// Adjusts a family of p-values; output order matches input order.
pub fn adjust_pvalues(pvalues: &[f64], method: CorrectionMethod) -> Result<Vec<f64>> {
    if pvalues.is_empty() {
        return Err(Error::InvalidInput("empty p-value family".into()));
    }
    for (i, &p) in pvalues.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "p-value {p} at index {i} is outside [0, 1]"
            )));
        }
    }
    let m = pvalues.len();
    if m == 1 {
        return Ok(vec![pvalues[0]]);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| pvalues[i]).collect();

    let adjusted_sorted = match method {
        CorrectionMethod::BonferroniDunn => {
            sorted.iter().map(|&p| (m as f64 * p).min(1.0)).collect()
        }
        CorrectionMethod::Holm => {
            let mut q = vec![0.0; m];
            let mut running: f64 = 0.0;
            for (i, &p) in sorted.iter().enumerate() {
                running = running.max((m - i) as f64 * p).min(1.0);
                q[i] = running;
            }
            q
        }
        CorrectionMethod::Hochberg => {
            let mut q = vec![0.0; m];
            let mut running: f64 = 1.0;
            for i in (0..m).rev() {
                running = running.min((m - i) as f64 * sorted[i]).min(1.0);
                q[i] = running;
            }
            q
        }
        CorrectionMethod::Hommel => hommel_sorted(&sorted),
    };

    let mut adjusted = vec![0.0; m];
    for (rank, &original) in order.iter().enumerate() {
        adjusted[original] = adjusted_sorted[rank];
    }
    Ok(adjusted)
}

/// Hommel adjustment on an ascending-sorted family (closure principle over
/// Simes tests, computed with Wright's (1992) quadratic-time recurrence).
fn hommel_sorted(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    if n == 2 {
        // The closure collapses to the Hochberg adjustment for two tests.
        let top = p[1];
        return vec![(2.0 * p[0]).min(top), top];
    }
    let nf = n as f64;
    let init = (0..n)
        .map(|i| nf * p[i] / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    let mut q = vec![init; n];
    let mut pa = vec![init; n];
    for mm in (2..=n - 1).rev() {
        let mmf = mm as f64;
        // Tail indices n-mm+1..n (0-based) paired with denominators 2..=mm.
        let q1 = (0..mm - 1)
            .map(|j| mmf * p[n - mm + 1 + j] / (j + 2) as f64)
            .fold(f64::INFINITY, f64::min);
        for (i, qi) in q.iter_mut().enumerate().take(n - mm + 1) {
            *qi = (mmf * p[i]).min(q1);
        }
        let tail_value = q[n - mm];
        for qi in q.iter_mut().skip(n - mm + 1) {
            *qi = tail_value;
        }
        for (pai, &qi) in pa.iter_mut().zip(&q) {
            *pai = pai.max(qi);
        }
    }
    pa.iter().zip(p).map(|(&a, &pi)| a.max(pi)).collect()
}
