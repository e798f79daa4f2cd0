//! Command-line entry point wiring the toolkit into an end-to-end workflow:
//! run experiment manifests, compare result archives with the rank-based
//! statistical pipeline, ablate optimizer components under paired seeds, tune
//! parameters by iterated racing, probe optimizers for structural bias, and
//! re-render report artifacts.
//!
//! Exit codes are the scripting contract: 0 = success, 1 = runtime failure,
//! 2 = invalid input, 3 = a valid comparison whose omnibus test found no
//! significant differences (the report is still written). All randomness
//! flows from seeds in the inputs; the process adds no entropy of its own,
//! and no subcommand writes outside its `--out` directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use fairbench_core::benchmark::{BaseFunction, SuiteDefinition, Tag, CATALOG};
use fairbench_core::harness::{
    ablation, bias_probe, paired_seed, parse_csv, records_to_matrix, render_csv, run_experiment,
    AblationOutcome, ExperimentPlan, RunRecord, Toggle,
};
use fairbench_core::optimizers::{Algorithm, Budget, OptimizerConfig};
use fairbench_core::report::{radar, ranking_bars, render_report, win_fraction, ChartRef};
use fairbench_core::stats::{rank_rows, CorrectionMethod};
use fairbench_core::tuner::{
    iterated_race_with, BuiltinTarget, ExternalCommand, IteratedRaceConfig, ParamSpace,
    TuneOutcome,
};
use fairbench_core::util::format_sci;
use fairbench_core::workflow::{
    compare_at_checkpoint, ComparisonConfig, ComparisonReport, ControlRule, ResultsMatrix,
};

/// Fair, reproducible comparison of stochastic optimizers.
#[derive(Parser)]
#[command(name = "fairbench", version, about, propagate_version = true)]
struct Cli {
    /// Cap worker threads for parallel execution (default: all cores; the
    /// FAIRBENCH_WORKERS environment variable supplies a default)
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment manifest and archive results as CSV
    Run(RunArgs),
    /// Compare algorithms in a results archive with the statistical workflow
    Compare(CompareArgs),
    /// Ablate optimizer components over a toggle grid with paired seeds
    Ablate(AblateArgs),
    /// Tune parameters with an iterated race over a budgeted target
    Tune(TuneArgs),
    /// Probe an optimizer for structural bias on a pure-noise objective
    ProbeBias(ProbeBiasArgs),
    /// Re-render Markdown and charts from a previously written report JSON
    Report(ReportArgs),
    /// Inspect the benchmark function catalog
    Functions(FunctionsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment manifest (JSON: suite, algorithms, runs, budget, master_seed)
    #[arg(long, value_name = "PATH")]
    manifest: PathBuf,
    /// Output directory for results.csv and a copy of the manifest
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Results CSV produced by `run` (or anything matching its schema)
    #[arg(long, value_name = "PATH")]
    results: PathBuf,
    /// Evaluation checkpoint to compare at; repeatable. Default: the largest
    /// checkpoint in the archive. The exit status reflects the last one listed
    #[arg(long = "checkpoint", value_name = "EVALS")]
    checkpoints: Vec<usize>,
    /// Significance level for every test in the workflow
    #[arg(long, default_value_t = 0.05, value_name = "A")]
    alpha: f64,
    /// p-value correction: holm, bonferroni_dunn, hochberg, or hommel
    #[arg(long, default_value = "holm", value_name = "METHOD")]
    correction: String,
    /// Control algorithm id (default: the best average rank)
    #[arg(long, value_name = "NAME")]
    control: Option<String>,
    /// Drop failed runs (paired across algorithms) instead of refusing them
    #[arg(long)]
    exclude_failed: bool,
    /// Output directory for report.md, report.json, and the charts
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    /// Base optimizer configuration (JSON)
    #[arg(long, value_name = "PATH")]
    base: PathBuf,
    /// Toggle grid (JSON array of {name, options: [{label, patch}]})
    #[arg(long, value_name = "PATH")]
    toggles: PathBuf,
    /// Suite definition (JSON: functions, dimension, policy, master_seed)
    #[arg(long, value_name = "PATH")]
    suite: PathBuf,
    /// Repetitions per (column, function) cell
    #[arg(long, default_value_t = 10, value_name = "R")]
    runs: usize,
    /// Evaluation budget per run
    #[arg(long, default_value_t = 20_000, value_name = "EVALS")]
    budget: usize,
    /// Master seed for the paired run seeds
    #[arg(long, default_value_t = 1, value_name = "SEED")]
    seed: u64,
    /// Output directory for ablation.md and ablation.json
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    /// Parameter space (JSON: {"parameters": [{name, kind, …}]})
    #[arg(long, value_name = "PATH")]
    space: PathBuf,
    /// `builtin` (race optimizer configs over --suite) or the path of an
    /// external program speaking the --instance/--seed/--param protocol
    #[arg(long, value_name = "TARGET")]
    target: String,
    /// Fixed leading argument for an external target; repeatable
    #[arg(long = "target-arg", value_name = "ARG")]
    target_args: Vec<String>,
    /// Base optimizer configuration for the builtin target (default: stock)
    #[arg(long, value_name = "PATH")]
    base: Option<PathBuf>,
    /// Suite definition for the builtin target (required with it)
    #[arg(long, value_name = "PATH")]
    suite: Option<PathBuf>,
    /// Evaluations per builtin-target run
    #[arg(long, default_value_t = 2_000, value_name = "EVALS")]
    target_evals: usize,
    /// Total target-run budget for the whole race
    #[arg(long, value_name = "B")]
    budget: u64,
    /// Master seed for sampling and instance streams
    #[arg(long, default_value_t = 7, value_name = "SEED")]
    seed: u64,
    /// Iterated-race configuration overrides (JSON)
    #[arg(long, value_name = "PATH")]
    race_config: Option<PathBuf>,
    /// Output directory for tuning.json
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ProbeBiasArgs {
    /// Algorithm under test: a built-in name (random_search, de_rand_1_bin,
    /// shade, mts_ls1, ils_hybrid, center_pull) or a config JSON path
    #[arg(long, value_name = "NAME|PATH")]
    algorithm: String,
    /// Search-space dimension
    #[arg(long, value_name = "D")]
    dim: usize,
    /// Number of independent probe runs (fewer than 30 warns)
    #[arg(long, value_name = "R")]
    runs: usize,
    /// Evaluations per probe run
    #[arg(long, default_value_t = 2_000, value_name = "EVALS")]
    evals: usize,
    /// Level for the per-dimension uniformity tests
    #[arg(long, default_value_t = 0.05, value_name = "A")]
    alpha: f64,
    /// Master seed for the probe runs
    #[arg(long, default_value_t = 11, value_name = "SEED")]
    seed: u64,
    /// Output directory for probe.json and probe.md
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// report.json from a previous compare (an object or an array)
    #[arg(long, value_name = "PATH")]
    from: PathBuf,
    /// Output directory for report.md and ranking.svg
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct FunctionsArgs {
    #[command(subcommand)]
    action: FunctionsAction,
}

#[derive(Subcommand)]
enum FunctionsAction {
    /// Print the catalog: id, name, bounds, and tags
    List(FunctionsListArgs),
}

#[derive(Args)]
struct FunctionsListArgs {
    /// Keep only functions carrying every listed tag (comma-separated or
    /// repeated)
    #[arg(long, value_delimiter = ',', value_name = "TAG")]
    tags: Vec<String>,
}

/// A diagnosed failure with its exit-code class.
enum Failure {
    /// Exit 2: the input violates a documented contract.
    Invalid(String),
    /// Exit 1: the input was fine but execution or output writing failed.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Runtime(m) => m,
        }
    }
}

/// Classifies a core error arising *after* inputs were loaded: I/O and failed
/// runs are runtime conditions; everything else is a contract violation.
fn from_core(error: fairbench_core::Error) -> Failure {
    match error {
        fairbench_core::Error::Io(_) | fairbench_core::Error::FailedRuns(_) => {
            Failure::Runtime(error.to_string())
        }
        _ => Failure::Invalid(error.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    init_workers(cli.workers)?;
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Compare(args) => compare_command(args),
        Command::Ablate(args) => ablate_command(args),
        Command::Tune(args) => tune_command(args),
        Command::ProbeBias(args) => probe_bias_command(args),
        Command::Report(args) => report_command(args),
        Command::Functions(args) => functions_command(args),
    }
}

/// Applies `--workers` (or the FAIRBENCH_WORKERS default) as a cap on the
/// global thread pool before any parallel work starts.
fn init_workers(flag: Option<usize>) -> Result<(), Failure> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("FAIRBENCH_WORKERS") {
            Ok(text) => Some(text.parse::<usize>().map_err(|_| {
                Failure::Invalid(format!(
                    "FAIRBENCH_WORKERS must be a positive integer, got '{text}'"
                ))
            })?),
            Err(std::env::VarError::NotPresent) => None,
            Err(std::env::VarError::NotUnicode(_)) => {
                return Err(Failure::Invalid("FAIRBENCH_WORKERS is not valid UTF-8".into()))
            }
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err(Failure::Invalid("worker count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- plumbing

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("invalid {what}: {e}")))
}

fn ensure_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn escape_cell(text: &str) -> String {
    text.replace('|', "\\|")
}

// ------------------------------------------------------------------- run

fn run_command(args: RunArgs) -> Result<ExitCode, Failure> {
    let text = read_input(&args.manifest)?;
    let plan: ExperimentPlan = parse_json(&text, "manifest")?;
    let records = run_experiment(&plan).map_err(from_core)?;
    let csv = render_csv(&records).map_err(from_core)?;
    ensure_out(&args.out)?;
    write_artifact(&args.out, "results.csv", csv.as_bytes())?;
    // Archive the manifest byte-for-byte next to the results it produced.
    write_artifact(&args.out, "manifest.json", text.as_bytes())?;
    println!(
        "wrote {} records ({} algorithms × {} functions × {} runs) to {}",
        records.len(),
        plan.algorithms.len(),
        plan.suite.functions.len(),
        plan.runs,
        args.out.join("results.csv").display()
    );
    Ok(ExitCode::SUCCESS)
}

// ----------------------------------------------------------------- compare

fn parse_correction(name: &str) -> Result<CorrectionMethod, Failure> {
    match name {
        "bonferroni_dunn" | "bonferroni-dunn" => Ok(CorrectionMethod::BonferroniDunn),
        "holm" => Ok(CorrectionMethod::Holm),
        "hochberg" => Ok(CorrectionMethod::Hochberg),
        "hommel" => Ok(CorrectionMethod::Hommel),
        other => Err(Failure::Invalid(format!(
            "unknown correction '{other}'; valid methods: bonferroni_dunn, holm, hochberg, hommel"
        ))),
    }
}

fn compare_command(args: CompareArgs) -> Result<ExitCode, Failure> {
    let text = read_input(&args.results)?;
    let records = parse_csv(&text).map_err(from_core)?;
    let checkpoints = resolve_checkpoints(&args.checkpoints, &records)?;
    let config = ComparisonConfig {
        alpha: args.alpha,
        correction: parse_correction(&args.correction)?,
        control: match &args.control {
            Some(name) => ControlRule::Named(name.clone()),
            None => ControlRule::BestAverageRank,
        },
        ..ComparisonConfig::default()
    };

    let mut reports = Vec::with_capacity(checkpoints.len());
    let mut last_matrix = None;
    for &checkpoint in &checkpoints {
        let matrix =
            records_to_matrix(&records, checkpoint, args.exclude_failed).map_err(from_core)?;
        reports.push(compare_at_checkpoint(&matrix, &config, Some(checkpoint)).map_err(from_core)?);
        last_matrix = Some(matrix);
    }
    let matrix = last_matrix.expect("at least one checkpoint");
    let final_checkpoint = *checkpoints.last().expect("at least one checkpoint");
    let wins = matrix.wins(config.summary, config.direction).map_err(from_core)?;

    ensure_out(&args.out)?;
    let mut charts = vec![ChartRef {
        file: "ranking.svg".into(),
        caption: "Average rank by checkpoint (lower is better)".into(),
    }];
    write_artifact(&args.out, "ranking.svg", &ranking_bars(&reports).map_err(from_core)?)?;

    // Tag-grouped charts only when every function id is a catalog name, so
    // the groups are well-defined.
    if let Some((groups, group_ranks)) = tag_groups(&matrix, &config) {
        let algorithms = matrix.algorithms().to_vec();
        write_artifact(
            &args.out,
            "radar.svg",
            &radar(&algorithms, &groups, &group_ranks).map_err(from_core)?,
        )?;
        charts.push(ChartRef {
            file: "radar.svg".into(),
            caption: "Average rank by function group (larger radius = better)".into(),
        });
        write_artifact(
            &args.out,
            "wins.svg",
            &win_fraction(&algorithms, &wins, None).map_err(from_core)?,
        )?;
        charts.push(ChartRef {
            file: "wins.svg".into(),
            caption: "Share of functions won at the final checkpoint".into(),
        });
    }

    let rendered = render_report(&reports, &charts).map_err(from_core)?;
    let markdown = insert_wins_section(&rendered.markdown, &matrix, &wins, final_checkpoint);
    write_artifact(&args.out, "report.md", markdown.as_bytes())?;
    write_artifact(&args.out, "report.json", rendered.json.as_bytes())?;

    let tally: Vec<String> = matrix
        .algorithms()
        .iter()
        .zip(&wins)
        .map(|(a, w)| format!("{a}={w}"))
        .collect();
    println!("wins at checkpoint {final_checkpoint}: {}", tally.join(", "));
    let verdict = reports.last().expect("non-empty");
    if verdict.significant() {
        println!(
            "significant differences at α = {} (omnibus p = {}); control: {}",
            args.alpha,
            format_sci(verdict.friedman.p_value),
            verdict.control
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "no significant differences at α = {} (omnibus p = {})",
            args.alpha,
            format_sci(verdict.friedman.p_value)
        );
        Ok(ExitCode::from(3))
    }
}

/// Explicit checkpoints, or the archive's largest one.
fn resolve_checkpoints(
    requested: &[usize],
    records: &[RunRecord],
) -> Result<Vec<usize>, Failure> {
    if !requested.is_empty() {
        return Ok(requested.to_vec());
    }
    records
        .iter()
        .filter_map(|r| r.errors.keys().max())
        .max()
        .copied()
        .map(|c| vec![c])
        .ok_or_else(|| Failure::Invalid("the archive records no checkpoints".into()))
}

/// Per-tag average ranks for the radar chart, when every function id parses
/// as a catalog name and at least three tag groups are populated.
fn tag_groups(matrix: &ResultsMatrix, config: &ComparisonConfig) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    if matrix.algorithms().len() < 2 {
        return None;
    }
    let bases: Option<Vec<BaseFunction>> = matrix
        .functions()
        .iter()
        .map(|f| BaseFunction::parse(f).ok())
        .collect();
    let bases = bases?;
    let ranks = rank_rows(&matrix.summaries(config.summary), config.direction).ok()?;
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for tag in Tag::ALL {
        let members: Vec<usize> = bases
            .iter()
            .enumerate()
            .filter(|(_, b)| b.base_tags().contains(&tag))
            .map(|(i, _)| i)
            .collect();
        if !members.is_empty() {
            groups.push((tag.key().to_string(), members));
        }
    }
    if groups.len() < 3 {
        return None;
    }
    let data: Vec<Vec<f64>> = (0..matrix.algorithms().len())
        .map(|a| {
            groups
                .iter()
                .map(|(_, members)| {
                    members.iter().map(|&f| ranks.ranks[f][a]).sum::<f64>()
                        / members.len() as f64
                })
                .collect()
        })
        .collect();
    Some((groups.into_iter().map(|(name, _)| name).collect(), data))
}

/// Adds a win-count table to the rendered Markdown, before the chart gallery.
fn insert_wins_section(
    markdown: &str,
    matrix: &ResultsMatrix,
    wins: &[u64],
    checkpoint: usize,
) -> String {
    let mut section = format!(
        "\n## Wins at checkpoint {checkpoint}\n\nFunctions where each algorithm's summary is \
         (tied-)best.\n\n| algorithm | wins |\n|---|---:|\n"
    );
    for (algorithm, count) in matrix.algorithms().iter().zip(wins) {
        let _ = writeln!(section, "| {} | {count} |", escape_cell(algorithm));
    }
    match markdown.find("\n## Charts\n") {
        Some(pos) => {
            let mut out = String::with_capacity(markdown.len() + section.len());
            out.push_str(&markdown[..pos]);
            out.push_str(&section);
            out.push_str(&markdown[pos..]);
            out
        }
        None => format!("{markdown}{section}"),
    }
}

// ------------------------------------------------------------------ ablate

fn ablate_command(args: AblateArgs) -> Result<ExitCode, Failure> {
    let base: OptimizerConfig = parse_json(&read_input(&args.base)?, "base config")?;
    let toggles: Vec<Toggle> = parse_json(&read_input(&args.toggles)?, "toggle grid")?;
    let suite: SuiteDefinition = parse_json(&read_input(&args.suite)?, "suite definition")?;
    let budget = Budget::evals_only(args.budget).map_err(from_core)?;
    let outcome =
        ablation(&base, &toggles, &suite, &budget, args.runs, args.seed).map_err(from_core)?;

    ensure_out(&args.out)?;
    write_artifact(&args.out, "ablation.md", ablation_markdown(&outcome).as_bytes())?;
    let metadata = ablation_metadata(&outcome, args.runs, args.seed)?;
    write_artifact(&args.out, "ablation.json", metadata.as_bytes())?;
    let better: Vec<String> = outcome
        .matrix
        .algorithms()
        .iter()
        .zip(&outcome.wins)
        .map(|(c, w)| format!("{c}={w}"))
        .collect();
    println!("better: {}", better.join(", "));
    Ok(ExitCode::SUCCESS)
}

/// Median error per (function, column) plus the "Better" row of win counts.
fn ablation_markdown(outcome: &AblationOutcome) -> String {
    let matrix = &outcome.matrix;
    let columns = matrix.algorithms();
    let summaries = matrix.summaries(fairbench_core::workflow::SummaryStatistic::Median);
    let mut md = String::from(
        "# Component ablation\n\nMedian error per function; the Better row counts the \
         functions where a column is (tied-)best.\n\n",
    );
    let header: Vec<String> = columns.iter().map(|c| escape_cell(c)).collect();
    let _ = writeln!(md, "| function | {} |", header.join(" | "));
    let _ = writeln!(md, "|---|{}", "---:|".repeat(columns.len()));
    for (f, function) in matrix.functions().iter().enumerate() {
        let cells: Vec<String> = summaries[f].iter().map(|v| format_sci(*v)).collect();
        let _ = writeln!(md, "| {} | {} |", escape_cell(function), cells.join(" | "));
    }
    let wins: Vec<String> = outcome.wins.iter().map(|w| w.to_string()).collect();
    let _ = writeln!(md, "| **Better** | {} |", wins.join(" | "));
    md
}

/// Machine-readable outcome: columns, win counts, and the paired seed table
/// (one seed per (function, run), shared by every column — the audit that the
/// design is paired).
fn ablation_metadata(
    outcome: &AblationOutcome,
    runs: usize,
    master_seed: u64,
) -> Result<String, Failure> {
    let seeds: serde_json::Map<String, serde_json::Value> = outcome
        .matrix
        .functions()
        .iter()
        .map(|function| {
            let per_run: Vec<serde_json::Value> = (0..runs)
                .map(|run| serde_json::Value::from(paired_seed(master_seed, function, run)))
                .collect();
            (function.clone(), serde_json::Value::from(per_run))
        })
        .collect();
    let value = serde_json::json!({
        "columns": outcome.matrix.algorithms(),
        "functions": outcome.matrix.functions(),
        "better": outcome.wins,
        "runs": runs,
        "master_seed": master_seed,
        "paired_seeds": seeds,
        "note": "every column reuses the same seed for a given (function, run)",
    });
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Failure::Runtime(format!("cannot encode ablation metadata: {e}")))?;
    text.push('\n');
    Ok(text)
}

// -------------------------------------------------------------------- tune

fn tune_command(args: TuneArgs) -> Result<ExitCode, Failure> {
    let space: ParamSpace = parse_json(&read_input(&args.space)?, "parameter space")?;
    let race_config = match &args.race_config {
        Some(path) => parse_json(&read_input(path)?, "race config")?,
        None => IteratedRaceConfig::default(),
    };
    let outcome = if args.target == "builtin" {
        let base = match &args.base {
            Some(path) => parse_json(&read_input(path)?, "base config")?,
            None => OptimizerConfig::default(),
        };
        let suite_path = args.suite.as_ref().ok_or_else(|| {
            Failure::Invalid("--target builtin requires --suite <PATH>".into())
        })?;
        let suite: SuiteDefinition = parse_json(&read_input(suite_path)?, "suite definition")?;
        let runner =
            BuiltinTarget::new(base, &suite, args.target_evals).map_err(from_core)?;
        iterated_race_with(&space, &runner, args.budget, args.seed, &race_config)
    } else {
        let mut runner = ExternalCommand::new(&args.target);
        runner.args = args.target_args.clone();
        iterated_race_with(&space, &runner, args.budget, args.seed, &race_config)
    }
    .map_err(from_core)?;

    ensure_out(&args.out)?;
    write_artifact(&args.out, "tuning.json", tuning_json(&outcome)?.as_bytes())?;
    println!(
        "winner: candidate {} ({}); {} of {} evaluations used",
        outcome.best.id,
        outcome.best.describe(),
        outcome.evaluations_used,
        args.budget
    );
    Ok(ExitCode::SUCCESS)
}

fn tuning_json(outcome: &TuneOutcome) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(outcome)
        .map_err(|e| Failure::Runtime(format!("cannot encode tuning outcome: {e}")))?;
    text.push('\n');
    Ok(text)
}

// -------------------------------------------------------------- probe-bias

fn probe_bias_command(args: ProbeBiasArgs) -> Result<ExitCode, Failure> {
    let config = resolve_algorithm(&args.algorithm)?;
    let report = bias_probe(&config, args.dim, args.runs, args.evals, args.alpha, args.seed)
        .map_err(from_core)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    // Verdict threshold: an unbiased optimizer rejects uniformity at roughly
    // the α rate; rejecting in half of all dimensions is unambiguous bias.
    let biased = report.rejection_fraction >= 0.5;
    let verdict = if biased { "fail" } else { "pass" };

    ensure_out(&args.out)?;
    let json = serde_json::json!({ "verdict": verdict, "report": &report });
    let mut text = serde_json::to_string_pretty(&json)
        .map_err(|e| Failure::Runtime(format!("cannot encode probe report: {e}")))?;
    text.push('\n');
    write_artifact(&args.out, "probe.json", text.as_bytes())?;

    let mut md = format!(
        "# Structural-bias probe\n\n- optimizer: {}\n- dimension: {}\n- runs: {}\n- verdict: \
         **{verdict}**\n- rejection fraction: {:.3} (α = {})\n- mean center distance: {:.3} \
         (uniform expectation ≈ 0.577)\n",
        report.optimizer,
        report.dimension,
        report.runs,
        report.rejection_fraction,
        report.alpha,
        report.mean_center_distance,
    );
    if !report.warnings.is_empty() {
        md.push_str("- warnings:\n");
        for warning in &report.warnings {
            let _ = writeln!(md, "  - {warning}");
        }
    }
    write_artifact(&args.out, "probe.md", md.as_bytes())?;
    println!(
        "verdict: {verdict} (rejection fraction {:.3}, mean center distance {:.3})",
        report.rejection_fraction, report.mean_center_distance
    );
    Ok(ExitCode::SUCCESS)
}

/// A built-in algorithm name, or a path to a full config JSON.
fn resolve_algorithm(value: &str) -> Result<OptimizerConfig, Failure> {
    if let Ok(algorithm) = Algorithm::from_str(value) {
        return Ok(OptimizerConfig { algorithm, ..OptimizerConfig::default() });
    }
    let path = Path::new(value);
    if path.exists() {
        return parse_json(&read_input(path)?, "optimizer config");
    }
    Err(Failure::Invalid(format!(
        "'{value}' is neither a built-in algorithm nor a readable config file; built-ins: {}",
        Algorithm::ALL.map(|a| a.key()).join(", ")
    )))
}

// ------------------------------------------------------------------ report

fn report_command(args: ReportArgs) -> Result<ExitCode, Failure> {
    let text = read_input(&args.from)?;
    let value: serde_json::Value = parse_json(&text, "report JSON")?;
    let reports: Vec<ComparisonReport> = if value.is_array() {
        serde_json::from_value(value)
            .map_err(|e| Failure::Invalid(format!("invalid report JSON: {e}")))?
    } else {
        vec![serde_json::from_value(value)
            .map_err(|e| Failure::Invalid(format!("invalid report JSON: {e}")))?]
    };
    let charts = vec![ChartRef {
        file: "ranking.svg".into(),
        caption: "Average rank by checkpoint (lower is better)".into(),
    }];
    let rendered = render_report(&reports, &charts).map_err(from_core)?;
    ensure_out(&args.out)?;
    write_artifact(&args.out, "ranking.svg", &ranking_bars(&reports).map_err(from_core)?)?;
    write_artifact(&args.out, "report.md", rendered.markdown.as_bytes())?;
    println!("re-rendered {} report(s) into {}", reports.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

// --------------------------------------------------------------- functions

fn functions_command(args: FunctionsArgs) -> Result<ExitCode, Failure> {
    match args.action {
        FunctionsAction::List(list) => {
            let filter: Vec<Tag> = list
                .tags
                .iter()
                .map(|t| Tag::parse(t).map_err(from_core))
                .collect::<Result<_, _>>()?;
            for function in CATALOG {
                let tags = function.base_tags();
                if !filter.iter().all(|wanted| tags.contains(wanted)) {
                    continue;
                }
                let (lo, hi) = function.default_bounds();
                let tag_list: Vec<&str> = tags.iter().map(|t| t.key()).collect();
                println!(
                    "{:<15} {:<14} [{lo}, {hi}]  {}",
                    function.key(),
                    function.display_name(),
                    tag_list.join(", ")
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
