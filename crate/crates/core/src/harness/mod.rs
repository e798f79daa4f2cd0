//! Experiment execution and persistence: runs algorithms × functions ×
//! repetitions under deterministic seeding, records checkpointed errors,
//! performs component ablations with paired seeds, and probes optimizers for
//! structural bias toward the center of the search box.
//!
//! Every run's seed is a stable hash of (master seed, algorithm id, function
//! id, run index), so the full record set is a pure function of the plan:
//! serial and concurrent execution produce identical output, and re-running a
//! plan reproduces it byte for byte.

mod csv;

pub use csv::{export_csv, ingest_csv, parse_csv, render_csv, CSV_COLUMNS};

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{BaseFunction, FunctionSpec, SuiteDefinition};
use crate::error::{Error, Result};
use crate::optimizers::{run, run_probe, Budget, OptimizerConfig};
use crate::stats::{ks_uniform, Direction, Sample};
use crate::util::stable_hash;
use crate::workflow::{ResultsMatrix, SummaryStatistic};

/// One algorithm under test: a short stable id (used in records, CSV, and
/// reports) plus its full configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEntry {
    pub id: String,
    pub config: OptimizerConfig,
}

/// A complete, reproducible experiment description. Serializes to the JSON
/// manifest format (`suite`, `algorithms`, `runs`, `budget`, `master_seed`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub suite: SuiteDefinition,
    pub algorithms: Vec<AlgorithmEntry>,
    /// Repetitions per (algorithm, function) cell.
    pub runs: usize,
    pub budget: Budget,
    pub master_seed: u64,
    /// Where artifacts go when driven by the command-line tool; irrelevant to
    /// the library API.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("plan lists no algorithms".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.algorithms {
            validate_id(&entry.id)?;
            if !seen.insert(&entry.id) {
                return Err(Error::Config(format!("duplicate algorithm id '{}'", entry.id)));
            }
            entry.config.validate()?;
        }
        Ok(())
    }
}

/// Ids end up in CSV cells and report keys, so keep them delimiter-free.
fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::Config("algorithm id must not be empty".into()));
    }
    if id.contains(',') || id.contains('\n') || id.contains('\r') {
        return Err(Error::Config(format!(
            "algorithm id '{id}' contains a delimiter character"
        )));
    }
    Ok(())
}

/// Everything recorded about one run. `errors` holds the best noiseless error
/// at every budget checkpoint (floored at zero; raw dips below the optimum
/// beyond 1e-12 are a bug and assert in debug builds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub function: String,
    pub dimension: usize,
    pub run: usize,
    pub seed: u64,
    /// Best error by evaluation count, one entry per checkpoint.
    pub errors: BTreeMap<usize, f64>,
    /// Always 0: records must be byte-reproducible across executions and
    /// machines, which real timings would break. The column is kept in the
    /// interchange schema for tools that do record it.
    pub wall_ms: u64,
    /// Diagnostic when the run aborted (non-finite evaluation); successful
    /// runs carry `None`. Failed runs are recorded, never dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunRecord {
    /// Canonical identity used for sorting and conflict messages.
    fn key(&self) -> (String, String, usize) {
        (self.algorithm.clone(), self.function.clone(), self.run)
    }

    fn describe(&self) -> String {
        format!(
            "algorithm={} function={} run={}",
            self.algorithm, self.function, self.run
        )
    }
}

/// Deterministic per-run seed: a stable hash of master seed, algorithm id,
/// function id, and run index.
pub fn run_seed(master_seed: u64, algorithm: &str, function: &str, run: usize) -> u64 {
    stable_hash(&[
        &master_seed.to_le_bytes(),
        algorithm.as_bytes(),
        function.as_bytes(),
        &(run as u64).to_le_bytes(),
    ])
}

/// Paired seed for ablation columns: identical for every toggle combination
/// at the same (function, run), which is what makes downstream paired tests
/// valid. Public so tools can audit the pairing in ablation metadata.
pub fn paired_seed(master_seed: u64, function: &str, run: usize) -> u64 {
    stable_hash(&[
        &master_seed.to_le_bytes(),
        b"paired",
        function.as_bytes(),
        &(run as u64).to_le_bytes(),
    ])
}

/// Executes the full plan, one record per (algorithm, function, run), sorted
/// by that triple. Runs execute concurrently on the ambient thread pool;
/// output is identical regardless of scheduling.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<RunRecord>> {
    plan.validate()?;
    let specs = plan.suite.build()?;
    let mut jobs = Vec::with_capacity(plan.algorithms.len() * specs.len() * plan.runs);
    for entry in &plan.algorithms {
        for spec in &specs {
            for run_index in 0..plan.runs {
                jobs.push((entry, spec, run_index));
            }
        }
    }
    let mut records = jobs
        .into_par_iter()
        .map(|(entry, spec, run_index)| execute_one(entry, spec, &plan.budget, plan.master_seed, run_index))
        .collect::<Result<Vec<RunRecord>>>()?;
    records.sort_by_key(RunRecord::key);
    Ok(records)
}

fn execute_one(
    entry: &AlgorithmEntry,
    spec: &FunctionSpec,
    budget: &Budget,
    master_seed: u64,
    run_index: usize,
) -> Result<RunRecord> {
    let seed = run_seed(master_seed, &entry.id, &spec.id, run_index);
    let trace = run(spec, &entry.config, budget, seed)?;
    Ok(RunRecord {
        algorithm: entry.id.clone(),
        function: spec.id.clone(),
        dimension: spec.dimension,
        run: run_index,
        seed,
        errors: trace.best_error_at,
        wall_ms: 0,
        failure: trace.failure,
    })
}

/// Collapses records into a results matrix at one checkpoint (cell = per-run
/// errors). Records with failures are refused unless `exclude_failed`, in
/// which case a failed run's index is dropped for that function across every
/// algorithm, preserving the pairing of the remaining runs.
pub fn records_to_matrix(
    records: &[RunRecord],
    checkpoint: usize,
    exclude_failed: bool,
) -> Result<ResultsMatrix> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to collate".into()));
    }
    let mut algorithms: Vec<String> = Vec::new();
    let mut functions: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), BTreeMap<usize, f64>> = BTreeMap::new();
    let mut failed: BTreeMap<String, std::collections::BTreeSet<usize>> = BTreeMap::new();
    let mut failures = Vec::new();
    for record in records {
        if !algorithms.contains(&record.algorithm) {
            algorithms.push(record.algorithm.clone());
        }
        if !functions.contains(&record.function) {
            functions.push(record.function.clone());
        }
        let error = *record.errors.get(&checkpoint).ok_or_else(|| Error::MissingCheckpoint {
            record: record.describe(),
            checkpoint: checkpoint as u64,
        })?;
        if record.failure.is_some() {
            failures.push(record.describe());
            failed.entry(record.function.clone()).or_default().insert(record.run);
        }
        let previous = cells
            .entry((record.function.clone(), record.algorithm.clone()))
            .or_default()
            .insert(record.run, error);
        if previous.is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate record for {}",
                record.describe()
            )));
        }
    }
    if !failures.is_empty() && !exclude_failed {
        return Err(Error::FailedRuns(failures.join("; ")));
    }
    algorithms.sort();
    functions.sort();
    let empty = std::collections::BTreeSet::new();
    let mut data: Vec<Vec<Vec<f64>>> = Vec::with_capacity(functions.len());
    for function in &functions {
        let dropped = failed.get(function).unwrap_or(&empty);
        let mut row = Vec::with_capacity(algorithms.len());
        for algorithm in &algorithms {
            let cell = cells.get(&(function.clone(), algorithm.clone())).ok_or_else(|| {
                Error::Shape(format!("missing cell ({algorithm}, {function})"))
            })?;
            let values: Vec<f64> = cell
                .iter()
                .filter(|(run, _)| !dropped.contains(run))
                .map(|(_, v)| *v)
                .collect();
            row.push(values);
        }
        data.push(row);
    }
    ResultsMatrix::from_cells(algorithms, functions, data)
}

/// One axis of an ablation grid: a named component with the variants to try.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toggle {
    /// Axis name; appears in column labels as `name=label`.
    pub name: String,
    pub options: Vec<ToggleOption>,
}

/// One setting of a toggle: a label plus the configuration fields it
/// overrides (a JSON object merged into the base config).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToggleOption {
    pub label: String,
    pub patch: serde_json::Map<String, serde_json::Value>,
}

/// Result of an ablation: the per-column matrix plus the "Better" row (wins
/// per column, ties crediting every tied column).
#[derive(Debug, Clone, PartialEq)]
pub struct AblationOutcome {
    pub matrix: ResultsMatrix,
    pub wins: Vec<u64>,
}

/// Runs every combination of the toggle grid over the suite, with seeds
/// shared across combinations for the same (function, run) — a paired design.
/// Columns appear in grid order (first toggle varies slowest) and are labeled
/// `name=label,name=label,…`.
pub fn ablation(
    base: &OptimizerConfig,
    toggles: &[Toggle],
    suite: &SuiteDefinition,
    budget: &Budget,
    runs: usize,
    master_seed: u64,
) -> Result<AblationOutcome> {
    if toggles.is_empty() {
        return Err(Error::Config("ablation needs a non-empty toggle grid".into()));
    }
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for toggle in toggles {
        if toggle.options.is_empty() {
            return Err(Error::Config(format!("toggle '{}' has no options", toggle.name)));
        }
        if !names.insert(&toggle.name) {
            return Err(Error::Config(format!("duplicate toggle '{}'", toggle.name)));
        }
        let mut labels = std::collections::BTreeSet::new();
        for option in &toggle.options {
            validate_id(&option.label)?;
            if !labels.insert(&option.label) {
                return Err(Error::Config(format!(
                    "toggle '{}' repeats label '{}'",
                    toggle.name, option.label
                )));
            }
        }
    }

    let columns = expand_grid(base, toggles)?;
    let specs = suite.build()?;

    let mut jobs = Vec::with_capacity(columns.len() * specs.len() * runs);
    for (c, (_, config)) in columns.iter().enumerate() {
        for (f, spec) in specs.iter().enumerate() {
            for run_index in 0..runs {
                jobs.push((c, config, f, spec, run_index));
            }
        }
    }
    let outcomes = jobs
        .into_par_iter()
        .map(|(c, config, f, spec, run_index)| {
            let seed = paired_seed(master_seed, &spec.id, run_index);
            let trace = run(spec, config, budget, seed)?;
            if let Some(diagnostic) = trace.failure {
                return Err(Error::FailedRuns(format!(
                    "column {} on {} run {run_index}: {diagnostic}",
                    c, spec.id
                )));
            }
            Ok((c, f, run_index, trace.final_error()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = vec![vec![vec![f64::NAN; runs]; specs.len()]; columns.len()];
    for (c, f, run_index, error) in outcomes {
        data[c][f][run_index] = error;
    }
    let labels: Vec<String> = columns.into_iter().map(|(label, _)| label).collect();
    let function_ids: Vec<String> = specs.iter().map(|s| s.id.clone()).collect();
    let matrix = ResultsMatrix::from_runs(labels, function_ids, &data)?;
    let wins = matrix.wins(SummaryStatistic::default(), Direction::default())?;
    Ok(AblationOutcome { matrix, wins })
}

/// Cartesian product of the toggle options applied to the base config.
fn expand_grid(
    base: &OptimizerConfig,
    toggles: &[Toggle],
) -> Result<Vec<(String, OptimizerConfig)>> {
    let base_value = serde_json::to_value(base)?;
    let known_fields: Vec<String> = base_value
        .as_object()
        .expect("config serializes to an object")
        .keys()
        .cloned()
        .collect();
    let mut combos: Vec<(Vec<String>, serde_json::Value)> = vec![(Vec::new(), base_value)];
    for toggle in toggles {
        let mut next = Vec::with_capacity(combos.len() * toggle.options.len());
        for (labels, value) in &combos {
            for option in &toggle.options {
                let mut labels = labels.clone();
                labels.push(format!("{}={}", toggle.name, option.label));
                let mut value = value.clone();
                let object = value.as_object_mut().expect("config stays an object");
                for (field, setting) in &option.patch {
                    if !known_fields.iter().any(|k| k == field) {
                        return Err(Error::Config(format!(
                            "toggle '{}' option '{}' patches unknown config field '{field}'",
                            toggle.name, option.label
                        )));
                    }
                    object.insert(field.clone(), setting.clone());
                }
                next.push((labels, value));
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|(labels, value)| {
            let label = labels.join(",");
            let config: OptimizerConfig = serde_json::from_value(value)
                .map_err(|e| Error::Config(format!("column '{label}': {e}")))?;
            config
                .validate()
                .map_err(|e| Error::Config(format!("column '{label}': {e}")))?;
            Ok((label, config))
        })
        .collect()
}

/// Outcome of a structural-bias probe.
///
/// Under the pure-noise objective an unbiased optimizer's final best points
/// are spatially uniform, so each dimension's Kolmogorov-Smirnov test rejects
/// at about the α rate and `rejection_fraction` stays near α. Center-biased
/// optimizers reject almost everywhere and show a mean center distance far
/// below the uniform expectation (≈ 0.577 when normalized by the
/// half-diagonal, in moderate dimensions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasProbeReport {
    pub optimizer: String,
    pub dimension: usize,
    pub runs: usize,
    pub alpha: f64,
    /// Per-dimension uniformity p-values for the final best coordinate.
    pub p_values: Vec<f64>,
    /// Fraction of dimensions with p < α; in [0, 1].
    pub rejection_fraction: f64,
    /// Mean over runs of ‖best − center‖ / half-diagonal.
    pub mean_center_distance: f64,
    pub warnings: Vec<String>,
}

/// Probes an optimizer for structural bias: the objective is fresh uniform
/// noise on every evaluation over the box [-100, 100]^dimension, so any
/// pattern in where the "best" points land is the optimizer's own doing.
pub fn bias_probe(
    config: &OptimizerConfig,
    dimension: usize,
    runs: usize,
    evaluations: usize,
    alpha: f64,
    master_seed: u64,
) -> Result<BiasProbeReport> {
    config.validate()?;
    if evaluations == 0 {
        return Err(Error::InvalidInput(
            "structural-bias probe requires at least one evaluation per run".into(),
        ));
    }
    if runs == 0 {
        return Err(Error::InvalidInput("structural-bias probe requires at least one run".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    // The spec only contributes the box; its landscape is never evaluated.
    let spec = FunctionSpec::base(BaseFunction::Sphere, dimension)?;
    let budget = Budget::evals_only(evaluations)?;
    let finals: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|run_index| {
            let seed = stable_hash(&[
                &master_seed.to_le_bytes(),
                b"bias-probe",
                &(run_index as u64).to_le_bytes(),
            ]);
            let trace = run_probe(&spec, config, &budget, seed)?;
            debug_assert!(trace.failure.is_none(), "noise objective cannot fail");
            Ok(trace.final_best)
        })
        .collect::<Result<_>>()?;

    let mut p_values = Vec::with_capacity(dimension);
    let mut rejections = 0usize;
    for d in 0..dimension {
        let coords: Vec<f64> = finals.iter().map(|point| point[d]).collect();
        let (lo, hi) = spec.bounds[d];
        let result = ks_uniform(&Sample::new(coords)?, lo, hi)?;
        if result.p_value < alpha {
            rejections += 1;
        }
        p_values.push(result.p_value);
    }

    let center: Vec<f64> = spec.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let half_diagonal = spec
        .bounds
        .iter()
        .map(|(lo, hi)| (0.5 * (hi - lo)).powi(2))
        .sum::<f64>()
        .sqrt();
    let mean_center_distance = finals
        .iter()
        .map(|point| {
            point
                .iter()
                .zip(&center)
                .map(|(x, c)| (x - c).powi(2))
                .sum::<f64>()
                .sqrt()
                / half_diagonal
        })
        .sum::<f64>()
        / runs as f64;

    let mut warnings = Vec::new();
    if runs < 30 {
        warnings.push(format!(
            "only {runs} runs: uniformity tests are low-powered below 30"
        ));
    }
    Ok(BiasProbeReport {
        optimizer: config.algorithm.to_string(),
        dimension,
        runs,
        alpha,
        p_values,
        rejection_fraction: rejections as f64 / dimension as f64,
        mean_center_distance,
        warnings,
    })
}
