//! The comparison methodology, end to end: summarize runs per function, rank,
//! gate on the Friedman omnibus, then — only if it fires — compare a control
//! algorithm against every opponent with the test the data actually supports,
//! and correct the family of p-values.
//!
//! Test selection follows the standard decision grid: both samples normal and
//! variances compatible → paired Student's t; normal but heteroscedastic →
//! Welch's t; anything else (including degenerate condition tests) → Wilcoxon
//! signed-rank. Every report embeds the condition-test verdicts so a reviewer
//! can audit the path taken, and embeds a digest of its input so a result can
//! be tied to its data.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::stats::{
    adjust_pvalues, average_ranks, friedman, ks_normality, levene, rank_rows, shapiro_wilk,
    t_test_paired, welch_t, wilcoxon_signed_rank, CorrectionMethod, Direction, LeveneCenter,
    PairedSamples, Sample, TestMethod, TestResult,
};
use crate::util::{format_g17, mean, median};

/// How the control algorithm (the one compared against all others) is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRule {
    /// The algorithm with the best (lowest) average rank.
    BestAverageRank,
    /// A specific algorithm id, which must exist in the input.
    Named(String),
}

impl Default for ControlRule {
    fn default() -> Self {
        ControlRule::BestAverageRank
    }
}

/// Per-function aggregate of the run errors used for ranking and pairwise
/// testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryStatistic {
    /// Robust to heavy-tailed run distributions; the default.
    #[default]
    Median,
    Mean,
}

/// Everything that parameterizes a comparison; embedded verbatim in the
/// report's provenance block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    /// Significance level, in (0, 1).
    pub alpha: f64,
    pub correction: CorrectionMethod,
    pub control: ControlRule,
    /// Sample sizes up to this use Shapiro-Wilk for the normality condition;
    /// larger samples use the Lilliefors-corrected Kolmogorov-Smirnov test.
    pub normality_small_n_threshold: usize,
    pub direction: Direction,
    pub summary: SummaryStatistic,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            alpha: 0.05,
            correction: CorrectionMethod::Holm,
            control: ControlRule::BestAverageRank,
            normality_small_n_threshold: 50,
            direction: Direction::LowerIsBetter,
            summary: SummaryStatistic::Median,
        }
    }
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.normality_small_n_threshold < 3 {
            return Err(Error::Config(
                "normality_small_n_threshold must be at least 3 (the Shapiro-Wilk minimum)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Rectangular (algorithm × function) grid of per-run error samples, with run
/// indices aligned across cells so paired tests are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsMatrix {
    algorithms: Vec<String>,
    functions: Vec<String>,
    runs: usize,
    /// `cells[function][algorithm]`.
    cells: Vec<Vec<Sample>>,
}

impl ResultsMatrix {
    /// Builds a matrix from explicit orderings and `data[algorithm][function]`
    /// = per-run errors.
    pub fn from_runs(
        algorithms: Vec<String>,
        functions: Vec<String>,
        data: &[Vec<Vec<f64>>],
    ) -> Result<ResultsMatrix> {
        if algorithms.is_empty() || functions.is_empty() {
            return Err(Error::SizeError("matrix needs at least one algorithm and one function".into()));
        }
        if has_duplicates(&algorithms) || has_duplicates(&functions) {
            return Err(Error::InvalidInput("algorithm and function ids must be unique".into()));
        }
        if data.len() != algorithms.len() || data.iter().any(|row| row.len() != functions.len()) {
            return Err(Error::Shape(format!(
                "data must be {} algorithms × {} functions",
                algorithms.len(),
                functions.len()
            )));
        }
        let runs = data[0][0].len();
        for (a, row) in data.iter().enumerate() {
            for (f, cell) in row.iter().enumerate() {
                if cell.len() != runs {
                    return Err(Error::Shape(format!(
                        "cell ({}, {}) has {} runs, expected {runs}",
                        algorithms[a],
                        functions[f],
                        cell.len()
                    )));
                }
            }
        }
        let cells = functions
            .iter()
            .enumerate()
            .map(|(f, _)| data.iter().map(|row| row[f].clone()).collect())
            .collect();
        ResultsMatrix::from_cells(algorithms, functions, cells)
    }

    /// Builds a matrix from `cells[function][algorithm]` = per-run errors.
    /// Within a function every algorithm must have the same run count (that
    /// is what keeps runs paired), but counts may differ across functions —
    /// the shape left behind when failed run indices are excluded.
    pub fn from_cells(
        algorithms: Vec<String>,
        functions: Vec<String>,
        data: Vec<Vec<Vec<f64>>>,
    ) -> Result<ResultsMatrix> {
        if algorithms.is_empty() || functions.is_empty() {
            return Err(Error::SizeError(
                "matrix needs at least one algorithm and one function".into(),
            ));
        }
        if has_duplicates(&algorithms) || has_duplicates(&functions) {
            return Err(Error::InvalidInput("algorithm and function ids must be unique".into()));
        }
        if data.len() != functions.len() || data.iter().any(|row| row.len() != algorithms.len()) {
            return Err(Error::Shape(format!(
                "data must be {} functions × {} algorithms",
                functions.len(),
                algorithms.len()
            )));
        }
        let mut runs = 0;
        let mut cells = Vec::with_capacity(functions.len());
        for (f, row) in data.into_iter().enumerate() {
            let expected = row[0].len();
            if expected == 0 {
                return Err(Error::SizeError(format!(
                    "function {} has no runs",
                    functions[f]
                )));
            }
            let mut samples = Vec::with_capacity(algorithms.len());
            for (a, cell) in row.into_iter().enumerate() {
                if cell.len() != expected {
                    return Err(Error::Shape(format!(
                        "cell ({}, {}) has {} runs, expected {expected}",
                        algorithms[a],
                        functions[f],
                        cell.len()
                    )));
                }
                samples.push(Sample::new(cell)?);
            }
            runs = runs.max(expected);
            cells.push(samples);
        }
        Ok(ResultsMatrix { algorithms, functions, runs, cells })
    }

    /// Builds a matrix from one value per cell (e.g. published result tables).
    pub fn from_single_values(
        algorithms: Vec<String>,
        functions: Vec<String>,
        values: &[Vec<f64>],
    ) -> Result<ResultsMatrix> {
        let data: Vec<Vec<Vec<f64>>> = values
            .iter()
            .map(|row| row.iter().map(|v| vec![*v]).collect())
            .collect();
        ResultsMatrix::from_runs(algorithms, functions, &data)
    }

    /// Builds a matrix from a map keyed by `(algorithm, function)`. Ids are
    /// ordered alphabetically; any missing (algorithm, function) combination
    /// is a shape error listing every absent cell.
    pub fn from_map(map: &BTreeMap<(String, String), Vec<f64>>) -> Result<ResultsMatrix> {
        let mut algorithms: Vec<String> = Vec::new();
        let mut functions: Vec<String> = Vec::new();
        for (a, f) in map.keys() {
            if !algorithms.contains(a) {
                algorithms.push(a.clone());
            }
            if !functions.contains(f) {
                functions.push(f.clone());
            }
        }
        algorithms.sort();
        functions.sort();
        let missing: Vec<String> = algorithms
            .iter()
            .flat_map(|a| {
                functions.iter().filter_map(move |f| {
                    if map.contains_key(&(a.clone(), f.clone())) {
                        None
                    } else {
                        Some(format!("({a}, {f})"))
                    }
                })
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::Shape(format!("missing cells: {}", missing.join(", "))));
        }
        let data: Vec<Vec<Vec<f64>>> = algorithms
            .iter()
            .map(|a| {
                functions
                    .iter()
                    .map(|f| map[&(a.clone(), f.clone())].clone())
                    .collect()
            })
            .collect();
        ResultsMatrix::from_runs(algorithms, functions, &data)
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn functions(&self) -> &[String] {
        &self.functions
    }

    /// Runs per cell (the maximum across functions when failed-run exclusion
    /// left some functions with fewer).
    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn cell(&self, algorithm: &str, function: &str) -> Option<&Sample> {
        let a = self.algorithms.iter().position(|x| x == algorithm)?;
        let f = self.functions.iter().position(|x| x == function)?;
        Some(&self.cells[f][a])
    }

    /// Per-function summaries, `rows = functions`, `columns = algorithms` —
    /// the orientation the ranking and Friedman machinery expects.
    pub fn summaries(&self, statistic: SummaryStatistic) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|sample| match statistic {
                        SummaryStatistic::Median => median(sample.values()),
                        SummaryStatistic::Mean => mean(sample.values()),
                    })
                    .collect()
            })
            .collect()
    }

    /// Per-algorithm count of functions on which it attains the best summary
    /// (ties credit every attaining algorithm) — the classic "Better" row.
    pub fn wins(&self, statistic: SummaryStatistic, direction: Direction) -> Result<Vec<u64>> {
        if self.algorithms.len() == 1 {
            // A lone column is tied-best everywhere.
            return Ok(vec![self.functions.len() as u64]);
        }
        crate::stats::count_wins(&self.summaries(statistic), direction)
    }

    /// SHA-256 over a canonical text rendering of ids and all values; ties a
    /// report to its exact input data.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.algorithms.join(",").as_bytes());
        hasher.update(b";");
        hasher.update(self.functions.join(",").as_bytes());
        hasher.update(b";");
        for row in &self.cells {
            for sample in row {
                for v in sample.values() {
                    hasher.update(format_g17(*v).as_bytes());
                    hasher.update(b",");
                }
                hasher.update(b"|");
            }
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            write!(hex, "{byte:02x}").expect("writing to String cannot fail");
        }
        hex
    }
}

fn has_duplicates(ids: &[String]) -> bool {
    let set: std::collections::BTreeSet<&String> = ids.iter().collect();
    set.len() != ids.len()
}

/// The pairwise test chosen for a pair of samples, with the condition-test
/// verdicts that justify it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSelection {
    pub method: TestMethod,
    /// Condition-test audit, one line per verdict.
    pub audit: Vec<String>,
}

/// Applies the decision grid for choosing a two-sample location test.
///
/// Both samples normal (at the config's α) and Levene accepting equal
/// variances → paired Student's t; normal but Levene rejecting → Welch's t;
/// any normality failure → Wilcoxon signed-rank. A degenerate condition test
/// (for instance a constant sample) forces the Wilcoxon fallback, with the
/// reason recorded in the audit.
pub fn select_test(a: &Sample, b: &Sample, config: &ComparisonConfig) -> TestSelection {
    let mut audit = Vec::new();
    let mut normal = true;
    let mut degenerate = false;
    for (label, sample) in [("first", a), ("second", b)] {
        let outcome = if sample.len() <= config.normality_small_n_threshold {
            shapiro_wilk(sample)
        } else {
            ks_normality(sample)
        };
        match outcome {
            Ok(result) => {
                let pass = result.p_value >= config.alpha;
                audit.push(format!(
                    "normality({label}): {} p = {} — {}",
                    result.method,
                    format_p(result.p_value),
                    if pass { "pass" } else { "fail" }
                ));
                normal &= pass;
            }
            Err(err) => {
                audit.push(format!("normality({label}): not testable ({err})"));
                degenerate = true;
            }
        }
    }
    if degenerate {
        audit.push("condition tests degenerate; falling back to Wilcoxon signed-rank".into());
        return TestSelection { method: TestMethod::WilcoxonSignedRank, audit };
    }
    if !normal {
        audit.push("normality rejected; using Wilcoxon signed-rank".into());
        return TestSelection { method: TestMethod::WilcoxonSignedRank, audit };
    }
    match levene(&[a.clone(), b.clone()], LeveneCenter::Mean) {
        Ok(result) => {
            let pass = result.p_value >= config.alpha;
            audit.push(format!(
                "variances: Levene p = {} — {}",
                format_p(result.p_value),
                if pass { "pass" } else { "fail" }
            ));
            if pass {
                TestSelection { method: TestMethod::PairedT, audit }
            } else {
                TestSelection { method: TestMethod::WelchT, audit }
            }
        }
        Err(err) => {
            audit.push(format!(
                "variances: Levene not testable ({err}); falling back to Wilcoxon signed-rank"
            ));
            TestSelection { method: TestMethod::WilcoxonSignedRank, audit }
        }
    }
}

fn format_p(p: f64) -> String {
    format!("{p:.4e}")
}

/// One control-vs-opponent outcome within a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDecision {
    pub opponent: String,
    pub test_used: TestMethod,
    pub raw_p: f64,
    /// Corrected for the family of k−1 comparisons; always ≥ `raw_p`.
    pub adjusted_p: f64,
    /// `adjusted_p < alpha` of the owning report.
    pub significant: bool,
    /// Condition-test verdicts and any fallback notes.
    pub audit: Vec<String>,
}

/// A per-algorithm average rank, in the input's algorithm order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub algorithm: String,
    pub rank: f64,
}

/// Report provenance: the exact configuration, a digest of the input data,
/// and audit notes (gate outcomes, fallbacks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ComparisonConfig,
    pub input_digest: String,
    pub functions: Vec<String>,
    pub runs: usize,
    pub notes: Vec<String>,
}

/// Complete, self-describing outcome of one comparison.
///
/// Field order is the report schema's key order. The structural guarantees:
/// `pairwise` is empty whenever `friedman.p_value ≥ alpha`, and under the
/// best-average-rank rule no algorithm out-ranks `control`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Evaluation count this comparison is taken at, when known.
    pub checkpoint: Option<usize>,
    pub average_ranks: Vec<RankEntry>,
    pub friedman: TestResult,
    pub control: String,
    pub pairwise: Vec<PairwiseDecision>,
    pub provenance: Provenance,
}

impl ComparisonReport {
    pub fn alpha(&self) -> f64 {
        self.provenance.config.alpha
    }

    /// True when the omnibus (or the k = 2 direct test) was significant.
    pub fn significant(&self) -> bool {
        self.friedman.p_value < self.alpha()
    }
}

/// Runs the full comparison pipeline on a results matrix.
///
/// With k ≥ 3 algorithms the Friedman test gates the pairwise stage: a
/// non-significant omnibus yields an empty `pairwise` list. With k = 2 the
/// omnibus would be redundant, so the single direct test (chosen by
/// [`select_test`]) takes its place in the `friedman` field and gates itself.
pub fn compare_algorithms(
    results: &ResultsMatrix,
    config: &ComparisonConfig,
) -> Result<ComparisonReport> {
    compare_at_checkpoint(results, config, None)
}

/// [`compare_algorithms`] with the checkpoint label filled in.
pub fn compare_at_checkpoint(
    results: &ResultsMatrix,
    config: &ComparisonConfig,
    checkpoint: Option<usize>,
) -> Result<ComparisonReport> {
    config.validate()?;
    let k = results.algorithms().len();
    let n = results.functions().len();
    if k < 2 {
        return Err(Error::SizeError(format!("comparison needs at least 2 algorithms, got {k}")));
    }
    if n < 2 {
        return Err(Error::SizeError(format!("comparison needs at least 2 functions, got {n}")));
    }

    let summaries = results.summaries(config.summary);
    let ranks = rank_rows(&summaries, config.direction)?;
    let avg = average_ranks(&ranks);
    let average_ranks: Vec<RankEntry> = results
        .algorithms()
        .iter()
        .zip(&avg)
        .map(|(algorithm, rank)| RankEntry { algorithm: algorithm.clone(), rank: *rank })
        .collect();

    let control_index = match &config.control {
        ControlRule::BestAverageRank => {
            let mut best = 0;
            for (i, r) in avg.iter().enumerate() {
                if *r < avg[best] {
                    best = i;
                }
            }
            best
        }
        ControlRule::Named(name) => results
            .algorithms()
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "named control '{name}' is not in the input (algorithms: {})",
                    results.algorithms().join(", ")
                ))
            })?,
    };
    let control = results.algorithms()[control_index].clone();

    let mut notes = Vec::new();
    let omnibus = if k == 2 {
        notes.push(
            "k = 2: the Friedman omnibus is redundant; the direct pairwise test gates itself"
                .to_string(),
        );
        let (result, _audit) =
            pairwise_test(&summaries, control_index, 1 - control_index, config);
        result
    } else {
        friedman(&ranks)?
    };

    let gate_open = omnibus.p_value < config.alpha;
    let mut pairwise = Vec::new();
    if gate_open {
        let opponents: Vec<usize> = (0..k).filter(|i| *i != control_index).collect();
        let mut raw = Vec::with_capacity(opponents.len());
        let mut rows = Vec::with_capacity(opponents.len());
        for &opp in &opponents {
            let (result, audit) = pairwise_test(&summaries, control_index, opp, config);
            raw.push(result.p_value);
            rows.push((results.algorithms()[opp].clone(), result, audit));
        }
        let adjusted = if k == 2 {
            raw.clone()
        } else {
            adjust_pvalues(&raw, config.correction)?
        };
        for (((opponent, result, audit), raw_p), adjusted_p) in
            rows.into_iter().zip(raw).zip(adjusted)
        {
            pairwise.push(PairwiseDecision {
                opponent,
                test_used: result.method,
                raw_p,
                adjusted_p,
                significant: adjusted_p < config.alpha,
                audit,
            });
        }
    } else {
        notes.push(format!(
            "no significant differences at alpha = {} (omnibus p = {})",
            config.alpha,
            format_p(omnibus.p_value)
        ));
    }

    Ok(ComparisonReport {
        checkpoint,
        average_ranks,
        friedman: omnibus,
        control,
        pairwise,
        provenance: Provenance {
            config: config.clone(),
            input_digest: results.digest(),
            functions: results.functions().to_vec(),
            runs: results.runs(),
            notes,
        },
    })
}

/// One full comparison per requested checkpoint, in the requested order —
/// the convergence-style view of a record set.
///
/// Every record must carry every requested checkpoint; a gap is an explicit
/// error naming the run and the missing checkpoint.
pub fn checkpoint_comparison(
    records: &[crate::harness::RunRecord],
    checkpoints: &[usize],
    config: &ComparisonConfig,
) -> Result<Vec<ComparisonReport>> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidInput("no checkpoints requested".into()));
    }
    checkpoints
        .iter()
        .map(|&checkpoint| {
            let matrix = crate::harness::records_to_matrix(records, checkpoint, false)?;
            compare_at_checkpoint(&matrix, config, Some(checkpoint))
        })
        .collect()
}

/// Runs the selected test between two summary columns, falling back down the
/// grid when the data cannot support the chosen test: a parametric test that
/// degenerates (zero-variance differences) falls back to the Wilcoxon
/// signed-rank, whose sign information survives constant offsets; only when
/// Wilcoxon itself is degenerate (no nonzero differences at all) is p = 1
/// reported — no evidence of a difference — with the reason audited.
/// Also used by the racing tuner, whose "summaries" are per-instance results.
pub(crate) fn pairwise_test(
    summaries: &[Vec<f64>],
    control: usize,
    opponent: usize,
    config: &ComparisonConfig,
) -> (TestResult, Vec<String>) {
    let a_values: Vec<f64> = summaries.iter().map(|row| row[control]).collect();
    let b_values: Vec<f64> = summaries.iter().map(|row| row[opponent]).collect();
    // Summary columns are finite by construction (Sample validated the runs),
    // so these cannot fail.
    let a = Sample::new(a_values.clone()).expect("summaries are finite and non-empty");
    let b = Sample::new(b_values.clone()).expect("summaries are finite and non-empty");
    let selection = select_test(&a, &b, config);
    let mut audit = selection.audit;
    let wilcoxon = || {
        PairedSamples::from_slices(&a_values, &b_values)
            .and_then(|pairs| wilcoxon_signed_rank(&pairs))
    };
    let mut method = selection.method;
    let outcome = match selection.method {
        TestMethod::PairedT => PairedSamples::from_slices(&a_values, &b_values)
            .and_then(|pairs| t_test_paired(&pairs)),
        TestMethod::WelchT => welch_t(&a, &b),
        _ => wilcoxon(),
    };
    let outcome = match outcome {
        Err(err) if matches!(selection.method, TestMethod::PairedT | TestMethod::WelchT) => {
            audit.push(format!(
                "{} degenerate ({err}); falling back to Wilcoxon signed-rank",
                selection.method
            ));
            method = TestMethod::WilcoxonSignedRank;
            wilcoxon()
        }
        other => other,
    };
    match outcome {
        Ok(result) => (result, audit),
        Err(err) => {
            audit.push(format!(
                "{method} degenerate ({err}); reporting p = 1 (no detectable difference)"
            ));
            (
                TestResult {
                    method,
                    statistic: 0.0,
                    p_value: 1.0,
                    n: summaries.len(),
                    notes: "degenerate comparison; no detectable difference".into(),
                },
                audit,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::tests_support::ERRORS_4X15;

    /// The published 15-function × 4-variant ablation matrix used across the
    /// test suite, in `data[algorithm][function]` orientation.
    fn published_matrix() -> ResultsMatrix {
        let algorithms = vec![
            "hybrid-full".to_string(),
            "variant-a".to_string(),
            "variant-b".to_string(),
            "variant-c".to_string(),
        ];
        let functions: Vec<String> = (1..=15).map(|i| format!("f{i:02}")).collect();
        let mut data = vec![vec![Vec::new(); 15]; 4];
        for (f, row) in ERRORS_4X15.iter().enumerate() {
            for (a, value) in row.iter().enumerate() {
                data[a][f] = vec![*value];
            }
        }
        ResultsMatrix::from_runs(algorithms, functions, &data).unwrap()
    }

    #[test]
    fn matrix_construction_validates_shape_and_runs() {
        let err = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into()],
            vec!["f".into()],
            &[vec![vec![1.0]], vec![vec![2.0]], vec![vec![3.0]]],
        );
        assert!(matches!(err, Err(Error::Shape(_))));
        let err = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into()],
            vec!["f".into()],
            &[vec![vec![1.0, 2.0]], vec![vec![3.0]]],
        );
        assert!(matches!(err, Err(Error::Shape(_))));
        let err = ResultsMatrix::from_runs(
            vec!["a".into(), "a".into()],
            vec!["f".into()],
            &[vec![vec![1.0]], vec![vec![2.0]]],
        );
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn from_map_reports_every_missing_cell() {
        let mut map = BTreeMap::new();
        map.insert(("a".to_string(), "f1".to_string()), vec![1.0]);
        map.insert(("a".to_string(), "f2".to_string()), vec![2.0]);
        map.insert(("b".to_string(), "f1".to_string()), vec![3.0]);
        let err = ResultsMatrix::from_map(&map).unwrap_err();
        match err {
            Error::Shape(message) => {
                assert!(message.contains("(b, f2)"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        map.insert(("b".to_string(), "f2".to_string()), vec![4.0]);
        let matrix = ResultsMatrix::from_map(&map).unwrap();
        assert_eq!(matrix.algorithms(), &["a".to_string(), "b".to_string()]);
        assert_eq!(matrix.cell("b", "f2").unwrap().values(), &[4.0]);
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let m1 = published_matrix();
        let m2 = published_matrix();
        assert_eq!(m1.digest(), m2.digest());
        let mut data = vec![vec![vec![1.0]; 2]; 2];
        data[0][0][0] = 1.0 + 1e-15;
        let m3 = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into()],
            vec!["f1".into(), "f2".into()],
            &data,
        )
        .unwrap();
        data[0][0][0] = 1.0 + 2e-15;
        let m4 = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into()],
            vec!["f1".into(), "f2".into()],
            &data,
        )
        .unwrap();
        assert_ne!(m3.digest(), m4.digest(), "digest must see ulp-level differences");
    }

    #[test]
    fn select_test_follows_the_decision_grid() {
        let config = ComparisonConfig::default();
        // Clearly normal-looking, equal-variance pair: standard normal
        // quantile spacing, one shifted.
        let base: Vec<f64> = (1..=20)
            .map(|i| crate::stats::dist::normal_quantile(i as f64 / 21.0))
            .collect();
        let a = Sample::new(base.clone()).unwrap();
        let b = Sample::new(base.iter().map(|x| x + 0.3).collect()).unwrap();
        let selection = select_test(&a, &b, &config);
        assert_eq!(selection.method, TestMethod::PairedT, "audit: {:?}", selection.audit);
        assert!(selection.audit.iter().any(|l| l.contains("normality(first)")));
        assert!(selection.audit.iter().any(|l| l.contains("Levene")));

        // Same shapes but one sample streched hard: Levene fails → Welch.
        let b = Sample::new(base.iter().map(|x| x * 20.0).collect()).unwrap();
        let selection = select_test(&a, &b, &config);
        assert_eq!(selection.method, TestMethod::WelchT, "audit: {:?}", selection.audit);

        // Heavy right tail on one side: normality fails → Wilcoxon.
        let skewed: Vec<f64> = (0..20).map(|i| ((i as f64) / 3.0).exp()).collect();
        let b = Sample::new(skewed).unwrap();
        let selection = select_test(&a, &b, &config);
        assert_eq!(
            selection.method,
            TestMethod::WilcoxonSignedRank,
            "audit: {:?}",
            selection.audit
        );

        // Constant sample: degenerate conditions force Wilcoxon with a note.
        let constant = Sample::new(vec![1.0; 20]).unwrap();
        let selection = select_test(&a, &constant, &config);
        assert_eq!(selection.method, TestMethod::WilcoxonSignedRank);
        assert!(selection.audit.iter().any(|l| l.contains("not testable")));
    }

    #[test]
    fn large_samples_use_the_lilliefors_branch() {
        let config = ComparisonConfig::default();
        let n = 120; // above the small-n threshold
        let values: Vec<f64> = (1..=n)
            .map(|i| crate::stats::dist::normal_quantile(i as f64 / (n + 1) as f64))
            .collect();
        let a = Sample::new(values.clone()).unwrap();
        let b = Sample::new(values.iter().map(|x| x + 1.0).collect()).unwrap();
        let selection = select_test(&a, &b, &config);
        assert!(
            selection.audit.iter().any(|l| l.contains("Kolmogorov-Smirnov")),
            "audit: {:?}",
            selection.audit
        );
    }

    #[test]
    fn published_ablation_matrix_reproduces_the_reference_pipeline() {
        // End-to-end on the published 15×4 values with the first column as
        // control: Friedman fires, three Wilcoxon comparisons, Holm applied.
        let matrix = published_matrix();
        let config = ComparisonConfig {
            control: ControlRule::Named("hybrid-full".into()),
            ..ComparisonConfig::default()
        };
        let report = compare_algorithms(&matrix, &config).unwrap();
        assert_eq!(report.control, "hybrid-full");
        assert_eq!(report.friedman.method, TestMethod::Friedman);
        assert!(report.significant());
        assert_eq!(report.pairwise.len(), 3);

        // Oracle: compose the pipeline by hand from the stats primitives.
        let summaries = matrix.summaries(SummaryStatistic::Median);
        let ranks = rank_rows(&summaries, Direction::LowerIsBetter).unwrap();
        let expected_friedman = friedman(&ranks).unwrap();
        assert_eq!(report.friedman, expected_friedman);
        let mut raw = Vec::new();
        for opponent in 1..4 {
            let pairs: Vec<(f64, f64)> =
                summaries.iter().map(|row| (row[0], row[opponent])).collect();
            let result = wilcoxon_signed_rank(&PairedSamples::new(pairs).unwrap()).unwrap();
            raw.push(result.p_value);
        }
        let adjusted = adjust_pvalues(&raw, CorrectionMethod::Holm).unwrap();
        for (decision, (r, q)) in report.pairwise.iter().zip(raw.iter().zip(&adjusted)) {
            assert_eq!(decision.test_used, TestMethod::WilcoxonSignedRank);
            assert_eq!(decision.raw_p, *r);
            assert_eq!(decision.adjusted_p, *q);
            assert_eq!(decision.significant, *q < 0.05);
            assert!(decision.adjusted_p >= decision.raw_p);
        }
        // The full hybrid wins the ranking.
        let best = report
            .average_ranks
            .iter()
            .min_by(|a, b| a.rank.total_cmp(&b.rank))
            .unwrap();
        assert_eq!(best.algorithm, "hybrid-full");
    }

    #[test]
    fn identical_algorithms_yield_an_empty_pairwise_list() {
        let data = vec![vec![vec![1.0], vec![2.0], vec![3.0]]; 3];
        let matrix = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["f1".into(), "f2".into(), "f3".into()],
            &data,
        )
        .unwrap();
        let report = compare_algorithms(&matrix, &ComparisonConfig::default()).unwrap();
        assert!(!report.significant());
        assert_eq!(report.friedman.p_value, 1.0);
        assert!(report.pairwise.is_empty());
        assert!(report
            .provenance
            .notes
            .iter()
            .any(|n| n.contains("no significant differences")));
    }

    #[test]
    fn k2_uses_the_direct_test_and_gates_itself() {
        // Column b is worse on every one of 8 functions: the exact Wilcoxon
        // two-sided p is 2/256 < 0.05, so the direct test fires.
        let a_vals: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let b_vals: Vec<f64> = (1..=8).map(|i| i as f64 + 0.5 + 0.1 * i as f64).collect();
        let functions: Vec<String> = (1..=8).map(|i| format!("f{i}")).collect();
        let data = vec![
            a_vals.iter().map(|v| vec![*v]).collect::<Vec<_>>(),
            b_vals.iter().map(|v| vec![*v]).collect::<Vec<_>>(),
        ];
        let matrix =
            ResultsMatrix::from_runs(vec!["a".into(), "b".into()], functions, &data).unwrap();
        let report = compare_algorithms(&matrix, &ComparisonConfig::default()).unwrap();
        assert_ne!(report.friedman.method, TestMethod::Friedman);
        assert!(report.significant());
        assert_eq!(report.pairwise.len(), 1);
        let decision = &report.pairwise[0];
        assert_eq!(decision.opponent, "b");
        // k = 2 applies no correction.
        assert_eq!(decision.raw_p, decision.adjusted_p);
        assert!(report
            .provenance
            .notes
            .iter()
            .any(|n| n.contains("k = 2")));

        // And a pair with no consistent difference stays quiet.
        let data = vec![
            a_vals.iter().map(|v| vec![*v]).collect::<Vec<_>>(),
            a_vals
                .iter()
                .enumerate()
                .map(|(i, v)| vec![if i % 2 == 0 { v + 0.1 } else { v - 0.1 }])
                .collect::<Vec<_>>(),
        ];
        let matrix = ResultsMatrix::from_runs(
            vec!["a".into(), "b".into()],
            (1..=8).map(|i| format!("f{i}")).collect(),
            &data,
        )
        .unwrap();
        let report = compare_algorithms(&matrix, &ComparisonConfig::default()).unwrap();
        assert!(!report.significant());
        assert!(report.pairwise.is_empty());
    }

    #[test]
    fn named_control_must_exist() {
        let matrix = published_matrix();
        let config = ComparisonConfig {
            control: ControlRule::Named("not-present".into()),
            ..ComparisonConfig::default()
        };
        assert!(matches!(compare_algorithms(&matrix, &config), Err(Error::Config(_))));
    }

    #[test]
    fn best_average_rank_control_is_never_outranked() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let k = rng.random_range(2..6);
            let n = rng.random_range(2..8);
            let data: Vec<Vec<Vec<f64>>> = (0..k)
                .map(|_| {
                    (0..n)
                        .map(|_| vec![rng.random_range(0.0..10.0)])
                        .collect()
                })
                .collect();
            let matrix = ResultsMatrix::from_runs(
                (0..k).map(|i| format!("alg{i}")).collect(),
                (0..n).map(|i| format!("f{i}")).collect(),
                &data,
            )
            .unwrap();
            let report = compare_algorithms(&matrix, &ComparisonConfig::default()).unwrap();
            let control_rank = report
                .average_ranks
                .iter()
                .find(|e| e.algorithm == report.control)
                .unwrap()
                .rank;
            for entry in &report.average_ranks {
                assert!(
                    entry.rank >= control_rank,
                    "{} out-ranks control {}",
                    entry.algorithm,
                    report.control
                );
            }
            // Gate discipline on random data.
            if !report.significant() {
                assert!(report.pairwise.is_empty());
            }
            for d in &report.pairwise {
                assert!(d.adjusted_p >= d.raw_p);
                assert_eq!(d.significant, d.adjusted_p < 0.05);
            }
        }
    }

    #[test]
    fn bonferroni_decisions_are_a_subset_of_holm_decisions() {
        let matrix = published_matrix();
        let holm_config = ComparisonConfig {
            control: ControlRule::Named("hybrid-full".into()),
            correction: CorrectionMethod::Holm,
            ..ComparisonConfig::default()
        };
        let bonf_config = ComparisonConfig {
            correction: CorrectionMethod::BonferroniDunn,
            ..holm_config.clone()
        };
        let holm = compare_algorithms(&matrix, &holm_config).unwrap();
        let bonf = compare_algorithms(&matrix, &bonf_config).unwrap();
        for (h, b) in holm.pairwise.iter().zip(&bonf.pairwise) {
            assert_eq!(h.opponent, b.opponent);
            assert!(
                !b.significant || h.significant,
                "Bonferroni found {} significant but Holm did not",
                b.opponent
            );
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let matrix = published_matrix();
        let config = ComparisonConfig::default();
        let a = compare_algorithms(&matrix, &config).unwrap();
        let b = compare_algorithms(&matrix, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn report_json_has_the_documented_key_order() {
        let matrix = published_matrix();
        let report = compare_algorithms(&matrix, &ComparisonConfig::default()).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let positions: Vec<usize> = [
            "\"checkpoint\"",
            "\"average_ranks\"",
            "\"friedman\"",
            "\"control\"",
            "\"pairwise\"",
            "\"provenance\"",
        ]
        .iter()
        .map(|key| json.find(key).unwrap_or_else(|| panic!("missing key {key}")))
        .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    }

    #[test]
    fn rank_artifacts_are_invariant_under_monotone_per_function_transforms() {
        // Strictly increasing transforms of one function's errors leave all
        // within-function ranks, the Friedman result, and the per-function
        // win directions unchanged. (Wilcoxon p-values respond to the
        // *magnitudes* of cross-function differences, so full pairwise
        // invariance additionally requires difference-preserving transforms;
        // that stronger case is covered below with shifts.)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let config = ComparisonConfig::default();
        for _ in 0..25 {
            let k = rng.random_range(3..6);
            let n = rng.random_range(3..9);
            let data: Vec<Vec<Vec<f64>>> = (0..k)
                .map(|_| (0..n).map(|_| vec![rng.random_range(0.0..100.0)]).collect())
                .collect();
            let algorithms: Vec<String> = (0..k).map(|i| format!("alg{i}")).collect();
            let functions: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
            let matrix =
                ResultsMatrix::from_runs(algorithms.clone(), functions.clone(), &data).unwrap();
            // Monotone map x ↦ x³/50 + 2x + 7 applied to one function row.
            let target = rng.random_range(0..n);
            let mut transformed = data.clone();
            for row in transformed.iter_mut() {
                for v in row[target].iter_mut() {
                    *v = v.powi(3) / 50.0 + 2.0 * *v + 7.0;
                }
            }
            let matrix_t =
                ResultsMatrix::from_runs(algorithms.clone(), functions.clone(), &transformed)
                    .unwrap();
            let before = compare_algorithms(&matrix, &config).unwrap();
            let after = compare_algorithms(&matrix_t, &config).unwrap();
            assert_eq!(before.average_ranks, after.average_ranks);
            assert_eq!(before.friedman, after.friedman);
            assert_eq!(before.control, after.control);
            assert_eq!(
                matrix.wins(SummaryStatistic::Median, Direction::LowerIsBetter).unwrap(),
                matrix_t.wins(SummaryStatistic::Median, Direction::LowerIsBetter).unwrap()
            );
            // The significance decisions survive as well (difference signs are
            // preserved, and none of these p-values sits on the α boundary).
            let decisions = |r: &ComparisonReport| -> Vec<(String, bool)> {
                r.pairwise.iter().map(|d| (d.opponent.clone(), d.significant)).collect()
            };
            assert_eq!(decisions(&before), decisions(&after));
        }
    }

    #[test]
    fn checkpoint_comparison_runs_one_report_per_checkpoint_in_order() {
        use crate::benchmark::{SuiteDefinition, TransformPolicy};
        use crate::harness::{run_experiment, records_to_matrix, AlgorithmEntry, ExperimentPlan};
        use crate::optimizers::{Algorithm, Budget, OptimizerConfig};
        let plan = ExperimentPlan {
            suite: SuiteDefinition {
                functions: vec!["sphere".into(), "rastrigin".into(), "ackley".into()],
                dimension: 3,
                policy: TransformPolicy::default(),
                master_seed: 2,
            },
            algorithms: vec![
                AlgorithmEntry {
                    id: "rs".into(),
                    config: OptimizerConfig::for_algorithm(Algorithm::RandomSearch),
                },
                AlgorithmEntry {
                    id: "de".into(),
                    config: OptimizerConfig::for_algorithm(Algorithm::DeRand1Bin),
                },
                AlgorithmEntry {
                    id: "mts".into(),
                    config: OptimizerConfig::for_algorithm(Algorithm::MtsLs1),
                },
            ],
            runs: 5,
            budget: Budget::new(300, vec![30, 150, 300]).unwrap(),
            master_seed: 9,
            output: None,
        };
        let records = run_experiment(&plan).unwrap();
        let config = ComparisonConfig::default();

        let reports = checkpoint_comparison(&records, &[30, 150, 300], &config).unwrap();
        assert_eq!(reports.len(), 3);
        assert_eq!(
            reports.iter().map(|r| r.checkpoint).collect::<Vec<_>>(),
            vec![Some(30), Some(150), Some(300)]
        );

        // Requested order is honored; contents don't depend on it.
        let reversed = checkpoint_comparison(&records, &[300, 150, 30], &config).unwrap();
        assert_eq!(reversed[0], reports[2]);
        assert_eq!(reversed[2], reports[0]);

        // A single checkpoint matches the direct comparison of that slice.
        let single = checkpoint_comparison(&records, &[150], &config).unwrap();
        let direct = compare_at_checkpoint(
            &records_to_matrix(&records, 150, false).unwrap(),
            &config,
            Some(150),
        )
        .unwrap();
        assert_eq!(single[0], direct);

        // A checkpoint absent from the records is an explicit error.
        let err = checkpoint_comparison(&records, &[31], &config).unwrap_err();
        assert!(matches!(err, Error::MissingCheckpoint { checkpoint: 31, .. }), "{err:?}");
    }

    #[test]
    fn wilcoxon_decisions_are_invariant_under_difference_preserving_shifts() {
        // Shifting one function's errors by a constant preserves every
        // cross-function difference, so the whole rank-based pairwise stage
        // (Wilcoxon statistics, p-values, decisions) must be identical.
        let matrix = published_matrix();
        let config = ComparisonConfig {
            control: ControlRule::Named("hybrid-full".into()),
            ..ComparisonConfig::default()
        };
        let before = compare_algorithms(&matrix, &config).unwrap();

        let functions: Vec<String> = (1..=15).map(|i| format!("f{i:02}")).collect();
        let algorithms = matrix.algorithms().to_vec();
        let mut data = vec![vec![Vec::new(); 15]; 4];
        for (f, row) in ERRORS_4X15.iter().enumerate() {
            for (a, value) in row.iter().enumerate() {
                let shift = if f == 4 { 1e3 } else { 0.0 };
                data[a][f] = vec![*value + shift];
            }
        }
        let shifted = ResultsMatrix::from_runs(algorithms, functions, &data).unwrap();
        let after = compare_algorithms(&shifted, &config).unwrap();
        assert_eq!(before.average_ranks, after.average_ranks);
        assert_eq!(before.friedman, after.friedman);
        for (b, a) in before.pairwise.iter().zip(&after.pairwise) {
            assert_eq!(b.test_used, a.test_used);
            assert_eq!(b.raw_p, a.raw_p);
            assert_eq!(b.adjusted_p, a.adjusted_p);
            assert_eq!(b.significant, a.significant);
        }
    }
}
