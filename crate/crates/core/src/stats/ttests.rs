//! Parametric location tests: the paired Student's t-test and Welch's
//! unequal-variance t-test. Both report two-sided p-values.

use crate::error::{Error, Result};
use crate::stats::dist;
use crate::stats::{PairedSamples, Sample, TestMethod, TestResult};
use crate::util;

/// Paired Student's t-test on the within-pair differences `a − b`.
///
/// `t = d̄ / (s_d / √n)` with `n − 1` degrees of freedom. Errors with
/// `DegenerateSample` when the differences have zero variance (every pair
/// differs by the same amount), where the statistic is undefined.
pub fn t_test_paired(pairs: &PairedSamples) -> Result<TestResult> {
    let d = pairs.differences();
    let n = d.len();
    let nf = n as f64;
    let mean = util::mean(&d);
    let var = util::sample_variance(&d);
    if var == 0.0 {
        return Err(Error::DegenerateSample(
            "paired differences have no variability; t statistic is undefined".into(),
        ));
    }
    let se = (var / nf).sqrt();
    let t = mean / se;
    let p = dist::t_two_sided(t, nf - 1.0);
    Ok(TestResult::new(
        TestMethod::PairedT,
        t,
        p,
        n,
        format!("df = {}", n - 1),
    ))
}

/// Welch's two-sample t-test (unequal variances, unpaired).
///
/// Degrees of freedom follow the Welch-Satterthwaite approximation. When both
/// samples are constant the standard error collapses to zero: equal means are
/// reported as `t = 0, p = 1`, unequal means as `DegenerateSample` (infinite
/// statistic).
pub fn welch_t(a: &Sample, b: &Sample) -> Result<TestResult> {
    let (na, nb) = (a.len(), b.len());
    if na < 2 || nb < 2 {
        return Err(Error::SizeError(format!(
            "Welch's t-test requires ≥ 2 observations per sample, got {na} and {nb}"
        )));
    }
    let (naf, nbf) = (na as f64, nb as f64);
    let (ma, mb) = (util::mean(a.values()), util::mean(b.values()));
    let va = util::sample_variance(a.values()) / naf;
    let vb = util::sample_variance(b.values()) / nbf;
    let se = (va + vb).sqrt();
    if se == 0.0 {
        if ma == mb {
            return Ok(TestResult::new(
                TestMethod::WelchT,
                0.0,
                1.0,
                na + nb,
                "both samples constant with equal means",
            ));
        }
        return Err(Error::DegenerateSample(
            "both samples constant with unequal means; t statistic is unbounded".into(),
        ));
    }
    let t = (ma - mb) / se;
    let df = (va + vb) * (va + vb) / (va * va / (naf - 1.0) + vb * vb / (nbf - 1.0));
    let p = dist::t_two_sided(t, df);
    Ok(TestResult::new(
        TestMethod::WelchT,
        t,
        p,
        na + nb,
        format!("Welch-Satterthwaite df = {df:.6}"),
    ))
}
