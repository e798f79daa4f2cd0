//! Racing-based parameter tuning in the F-Race family: candidate
//! configurations are evaluated over a stream of paired instances, and after
//! each block an omnibus test over the survivors gates Holm-corrected
//! pairwise tests against the current leader — statistically inferior
//! candidates are eliminated and never evaluated again. The iterated variant
//! (as in iterated racing / I-RACE) alternates racing with re-sampling around
//! the survivors, drawing numeric parameters from truncated normals whose
//! spread halves each round and re-weighting categorical choices toward the
//! survivors' values.
//!
//! Statistical discipline mirrors the comparison workflow: with two survivors
//! the omnibus is the direct pairwise test (which gates itself); with more,
//! the Friedman test over per-instance ranks. No elimination ever happens
//! without a significant gate and the configured correction across the
//! simultaneous comparisons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{FunctionSpec, SuiteDefinition};
use crate::error::{Error, Result};
use crate::optimizers::{run, Budget, OptimizerConfig};
use crate::stats::{adjust_pvalues, average_ranks, friedman, rank_rows, CorrectionMethod, Direction};
use crate::util::stable_hash;
use crate::workflow::{pairwise_test, ComparisonConfig};

/// Domain of one tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    /// Continuous value in `[low, high]`.
    Real { low: f64, high: f64 },
    /// Integer value in `[low, high]` (both ends included).
    Integer { low: i64, high: i64 },
    /// One of a fixed set of labels.
    Categorical { options: Vec<String> },
}

/// A named parameter and its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

/// The space being tuned over: an ordered list of uniquely named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub parameters: Vec<ParamDef>,
}

impl ParamSpace {
    pub fn new(parameters: Vec<ParamDef>) -> Result<ParamSpace> {
        let space = ParamSpace { parameters };
        space.validate()?;
        Ok(space)
    }

    /// Checks every domain: real and integer bounds must satisfy `low < high`
    /// with finite reals, categorical options must be non-empty and distinct,
    /// and parameter names must be unique.
    pub fn validate(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::Config("parameter space has no parameters".into()));
        }
        let mut names = BTreeSet::new();
        for def in &self.parameters {
            if def.name.is_empty() {
                return Err(Error::Config("parameter with an empty name".into()));
            }
            if !names.insert(def.name.as_str()) {
                return Err(Error::Config(format!("duplicate parameter name '{}'", def.name)));
            }
            match &def.kind {
                ParamKind::Real { low, high } => {
                    if !(low.is_finite() && high.is_finite() && low < high) {
                        return Err(Error::Config(format!(
                            "parameter '{}': real bounds need finite low < high, got [{low}, {high}]",
                            def.name
                        )));
                    }
                }
                ParamKind::Integer { low, high } => {
                    if low >= high {
                        return Err(Error::Config(format!(
                            "parameter '{}': integer bounds need low < high, got [{low}, {high}]",
                            def.name
                        )));
                    }
                }
                ParamKind::Categorical { options } => {
                    if options.is_empty() {
                        return Err(Error::Config(format!(
                            "parameter '{}': categorical needs at least one option",
                            def.name
                        )));
                    }
                    let distinct: BTreeSet<&str> = options.iter().map(String::as_str).collect();
                    if distinct.len() != options.len() {
                        return Err(Error::Config(format!(
                            "parameter '{}': categorical options must be distinct",
                            def.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Verifies that a candidate assigns exactly the space's parameters and
    /// every value lies in its domain.
    pub fn check_candidate(&self, candidate: &Candidate) -> Result<()> {
        if candidate.assignment.len() != self.parameters.len() {
            return Err(Error::InvalidInput(format!(
                "candidate {} assigns {} parameters, the space has {}",
                candidate.id,
                candidate.assignment.len(),
                self.parameters.len()
            )));
        }
        for def in &self.parameters {
            let value = candidate.assignment.get(&def.name).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "candidate {} is missing parameter '{}'",
                    candidate.id, def.name
                ))
            })?;
            let ok = match (&def.kind, value) {
                (ParamKind::Real { low, high }, ParamValue::Real(v)) => low <= v && v <= high,
                (ParamKind::Integer { low, high }, ParamValue::Integer(v)) => low <= v && v <= high,
                (ParamKind::Categorical { options }, ParamValue::Categorical(v)) => {
                    options.contains(v)
                }
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "candidate {}: value {value} is outside the domain of '{}'",
                    candidate.id, def.name
                )));
            }
        }
        Ok(())
    }
}

/// A concrete parameter value. Untagged in JSON: `3` is an integer, `3.5` a
/// real, `"fast"` a categorical label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Integer(i64),
    Real(f64),
    Categorical(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{}` on f64 prints the shortest digits that parse back exactly,
            // so the external protocol round-trips values losslessly.
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Integer(v) => write!(f, "{v}"),
            ParamValue::Categorical(v) => f.write_str(v),
        }
    }
}

/// One configuration under test: an id (unique within a race) and a full
/// assignment of the space's parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    pub assignment: BTreeMap<String, ParamValue>,
}

impl Candidate {
    /// `name=value` pairs in name order, for audit lines.
    pub fn describe(&self) -> String {
        self.assignment
            .iter()
            .map(|(name, value)| format!("{name}={value}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// One problem instance: an opaque id the target understands plus the seed
/// the target must use, so every candidate sees identical conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub seed: u64,
}

/// Whatever evaluates a candidate on an instance: the toolkit's own
/// optimizers ([`BuiltinTarget`]), an external program ([`ExternalCommand`]),
/// or any closure `Fn(&Candidate, &Instance) -> Result<f64> + Sync`.
///
/// Lower return values are better. An `Err` marks the evaluation — and the
/// candidate — as failed.
pub trait TargetRunner: Sync {
    fn evaluate(&self, candidate: &Candidate, instance: &Instance) -> Result<f64>;

    /// The deterministic instance stream used by [`iterated_race`]; index is
    /// global across rounds so no instance is ever reused.
    fn instance(&self, index: usize, master_seed: u64) -> Instance {
        Instance {
            id: format!("i{index}"),
            seed: stable_hash(&[
                &master_seed.to_le_bytes(),
                b"instance",
                &(index as u64).to_le_bytes(),
            ]),
        }
    }
}

impl<F> TargetRunner for F
where
    F: Fn(&Candidate, &Instance) -> Result<f64> + Sync,
{
    fn evaluate(&self, candidate: &Candidate, instance: &Instance) -> Result<f64> {
        self(candidate, instance)
    }
}

/// One elimination event: who fell, after how many instances, and on the
/// strength of which test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    /// The eliminated candidate's id.
    pub candidate: usize,
    /// Number of instances consumed when the decision was taken.
    pub after_instances: usize,
    /// The deciding test ("Wilcoxon signed-rank", …) or "evaluation failure".
    pub test: String,
    /// Human-readable evidence: p-values, the leader compared against, or the
    /// failure diagnostic.
    pub note: String,
}

/// Full account of one race: every entrant, who is still alive, every result
/// each candidate saw while alive, and the ordered elimination log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceState {
    pub candidates: Vec<Candidate>,
    /// Positions (indices into `candidates`) still racing, in entry order.
    pub alive: Vec<usize>,
    /// `results[i][t]` is candidate `i`'s error on the `t`-th instance it
    /// saw; eliminated candidates' rows stop growing at their elimination.
    pub results: Vec<Vec<f64>>,
    pub instances_used: usize,
    pub evaluations_used: u64,
    /// Ordered by block index: every elimination decision in sequence.
    pub eliminations: Vec<Elimination>,
}

impl RaceState {
    /// Alive candidates, best average rank first (ties keep entry order).
    /// Empty only if every candidate failed.
    pub fn ranked_alive(&self) -> Vec<Candidate> {
        if self.alive.len() < 2 || self.instances_used == 0 {
            return self.alive.iter().map(|&i| self.candidates[i].clone()).collect();
        }
        let rows: Vec<Vec<f64>> = (0..self.instances_used)
            .map(|t| self.alive.iter().map(|&i| self.results[i][t]).collect())
            .collect();
        let ranks = rank_rows(&rows, Direction::LowerIsBetter)
            .expect("alive results form a complete matrix");
        let avg = average_ranks(&ranks);
        let mut order: Vec<usize> = (0..self.alive.len()).collect();
        order.sort_by(|&a, &b| avg[a].partial_cmp(&avg[b]).expect("ranks are finite"));
        order.into_iter().map(|pos| self.candidates[self.alive[pos]].clone()).collect()
    }

    /// The best-ranked survivor, if any candidate survived.
    pub fn best(&self) -> Option<Candidate> {
        self.ranked_alive().into_iter().next()
    }
}

/// Statistical knobs of one race.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceConfig {
    /// Significance level for both the omnibus gate and the corrected
    /// pairwise eliminations, in (0, 1).
    pub alpha: f64,
    /// Instances every candidate must see before the first test; at least 2.
    pub min_instances: usize,
    /// Hard cap on the total number of evaluations the race may spend.
    pub budget: u64,
    /// Correction applied across the simultaneous pairwise comparisons.
    pub correction: CorrectionMethod,
}

impl RaceConfig {
    /// Holm correction, the family default.
    pub fn new(alpha: f64, min_instances: usize, budget: u64) -> RaceConfig {
        RaceConfig { alpha, min_instances, budget, correction: CorrectionMethod::Holm }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && 0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} is not in (0, 1)", self.alpha)));
        }
        if self.min_instances < 2 {
            return Err(Error::Config(format!(
                "min_instances = {} but the first paired test needs at least 2 instances",
                self.min_instances
            )));
        }
        Ok(())
    }
}

/// Uniform initial sampling: one independent draw per parameter per
/// candidate, deterministic in `seed`. Candidates get ids `0..n`.
pub fn sample_candidates(space: &ParamSpace, n: usize, seed: u64) -> Result<Vec<Candidate>> {
    space.validate()?;
    if n < 2 {
        return Err(Error::SizeError(format!(
            "sampling needs at least 2 candidates to race, got {n}"
        )));
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(stable_hash(&[&seed.to_le_bytes(), b"sample-candidates"]));
    Ok((0..n)
        .map(|id| Candidate { id, assignment: sample_assignment(space, &mut rng) })
        .collect())
}

fn sample_assignment(space: &ParamSpace, rng: &mut ChaCha8Rng) -> BTreeMap<String, ParamValue> {
    space
        .parameters
        .iter()
        .map(|def| {
            let value = match &def.kind {
                ParamKind::Real { low, high } => ParamValue::Real(rng.random_range(*low..*high)),
                ParamKind::Integer { low, high } => {
                    ParamValue::Integer(rng.random_range(*low..=*high))
                }
                ParamKind::Categorical { options } => {
                    ParamValue::Categorical(options[rng.random_range(0..options.len())].clone())
                }
            };
            (def.name.clone(), value)
        })
        .collect()
}

/// Races `candidates` over `instances` until the budget runs out, the
/// instances do, or one candidate remains.
///
/// Every alive candidate is evaluated on each instance with the identical
/// `(id, seed)` pair — a block; blocks run in parallel, decisions are taken
/// at the serialization point after each block. Once `min_instances` blocks
/// are in, each block is followed by an omnibus test over the survivors
/// (Friedman, or the direct pairwise test when only two remain); if it is
/// significant, every candidate whose corrected pairwise test against the
/// best-ranked survivor is significant is eliminated. A block that the
/// remaining budget cannot cover in full is not started, so pairing is never
/// broken. A single entrant wins by default: zero instances are consumed.
pub fn race<R: TargetRunner + ?Sized>(
    candidates: Vec<Candidate>,
    instances: &[Instance],
    runner: &R,
    config: &RaceConfig,
) -> Result<RaceState> {
    config.validate()?;
    if candidates.is_empty() {
        return Err(Error::SizeError("a race needs at least one candidate".into()));
    }
    let distinct: BTreeSet<usize> = candidates.iter().map(|c| c.id).collect();
    if distinct.len() != candidates.len() {
        return Err(Error::InvalidInput("candidate ids must be unique within a race".into()));
    }
    let n = candidates.len();
    let mut state = RaceState {
        candidates,
        alive: (0..n).collect(),
        results: vec![Vec::new(); n],
        instances_used: 0,
        evaluations_used: 0,
        eliminations: Vec::new(),
    };
    if n == 1 {
        return Ok(state);
    }

    for instance in instances {
        if state.alive.len() < 2 {
            break;
        }
        let block = state.alive.len() as u64;
        if state.evaluations_used + block > config.budget {
            break;
        }
        let outcomes: Vec<(usize, Result<f64>)> = {
            let candidates = &state.candidates;
            state
                .alive
                .par_iter()
                .map(|&i| (i, runner.evaluate(&candidates[i], instance)))
                .collect()
        };
        state.evaluations_used += block;
        state.instances_used += 1;
        for (i, outcome) in outcomes {
            let why = match outcome {
                Ok(v) if v.is_finite() => {
                    state.results[i].push(v);
                    continue;
                }
                Ok(v) => format!("returned the non-finite value {v}"),
                Err(err) => err.to_string(),
            };
            state.alive.retain(|&a| a != i);
            state.eliminations.push(Elimination {
                candidate: state.candidates[i].id,
                after_instances: state.instances_used,
                test: "evaluation failure".into(),
                note: format!("instance '{}': {why}", instance.id),
            });
        }
        if state.alive.len() >= 2 && state.instances_used >= config.min_instances {
            step_eliminations(&mut state, config)?;
        }
    }
    Ok(state)
}

/// One decision step over the completed blocks: omnibus gate, then corrected
/// pairwise tests of every survivor against the best-ranked one.
fn step_eliminations(state: &mut RaceState, config: &RaceConfig) -> Result<()> {
    let t = state.instances_used;
    let k = state.alive.len();
    // Alive rows all have exactly `t` results (failures were removed above),
    // so this is the complete paired matrix: rows = instances, columns =
    // alive candidates.
    let rows: Vec<Vec<f64>> =
        (0..t).map(|r| state.alive.iter().map(|&i| state.results[i][r]).collect()).collect();
    let workflow_config = ComparisonConfig {
        alpha: config.alpha,
        correction: config.correction,
        ..ComparisonConfig::default()
    };
    let ranks = rank_rows(&rows, Direction::LowerIsBetter)?;
    let avg = average_ranks(&ranks);
    let mut best = 0;
    for (pos, r) in avg.iter().enumerate() {
        if *r < avg[best] {
            best = pos;
        }
    }
    let omnibus = if k == 2 {
        pairwise_test(&rows, best, 1 - best, &workflow_config).0
    } else {
        friedman(&ranks)?
    };
    if omnibus.p_value >= config.alpha {
        return Ok(());
    }

    let opponents: Vec<usize> = (0..k).filter(|&pos| pos != best).collect();
    let mut raw = Vec::with_capacity(opponents.len());
    let mut methods = Vec::with_capacity(opponents.len());
    for &pos in &opponents {
        let (result, _audit) = pairwise_test(&rows, best, pos, &workflow_config);
        raw.push(result.p_value);
        methods.push(result.method);
    }
    let adjusted = adjust_pvalues(&raw, config.correction)?;
    let best_id = state.candidates[state.alive[best]].id;
    let mut drop = Vec::new();
    for (((&pos, raw_p), adjusted_p), method) in
        opponents.iter().zip(&raw).zip(&adjusted).zip(&methods)
    {
        if *adjusted_p < config.alpha {
            drop.push(state.alive[pos]);
            state.eliminations.push(Elimination {
                candidate: state.candidates[state.alive[pos]].id,
                after_instances: t,
                test: method.to_string(),
                note: format!(
                    "omnibus {} p = {:.4e}; vs candidate {best_id}: raw p = {:.4e}, {} p = {:.4e} < alpha = {}",
                    omnibus.method, omnibus.p_value, raw_p, config.correction, adjusted_p, config.alpha
                ),
            });
        }
    }
    state.alive.retain(|i| !drop.contains(i));
    Ok(())
}

/// Knobs of the iterated race. The refinement spread and the categorical
/// re-weighting are not dictated by any single convention, so they are
/// explicit here and echoed in the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IteratedRaceConfig {
    pub rounds: usize,
    pub candidates_per_round: usize,
    /// Fresh instances drawn per round; never reused across rounds.
    pub instances_per_round: usize,
    pub min_instances: usize,
    pub alpha: f64,
    pub correction: CorrectionMethod,
    /// Initial truncated-normal spread for numeric parameters, as a fraction
    /// of the parameter's range.
    pub sigma_fraction: f64,
    /// Per-round multiplier on the spread (0.5 = halving).
    pub sigma_shrink: f64,
    /// Probability that a refined categorical value keeps its parent's
    /// choice instead of re-drawing uniformly.
    pub elite_weight: f64,
}

impl Default for IteratedRaceConfig {
    fn default() -> Self {
        IteratedRaceConfig {
            rounds: 3,
            candidates_per_round: 6,
            instances_per_round: 8,
            min_instances: 2,
            alpha: 0.05,
            correction: CorrectionMethod::Holm,
            sigma_fraction: 0.25,
            sigma_shrink: 0.5,
            elite_weight: 0.7,
        }
    }
}

impl IteratedRaceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("iterated race needs at least one round".into()));
        }
        if self.candidates_per_round < 2 {
            return Err(Error::Config(format!(
                "candidates_per_round = {} but a race needs at least 2 entrants",
                self.candidates_per_round
            )));
        }
        if self.min_instances < 2 {
            return Err(Error::Config(format!(
                "min_instances = {} but the first paired test needs at least 2 instances",
                self.min_instances
            )));
        }
        if self.instances_per_round < self.min_instances {
            return Err(Error::Config(format!(
                "instances_per_round = {} is below min_instances = {}",
                self.instances_per_round, self.min_instances
            )));
        }
        if !(self.alpha.is_finite() && 0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} is not in (0, 1)", self.alpha)));
        }
        if !(self.sigma_fraction.is_finite() && self.sigma_fraction > 0.0) {
            return Err(Error::Config("sigma_fraction must be positive".into()));
        }
        if !(self.sigma_shrink.is_finite() && 0.0 < self.sigma_shrink && self.sigma_shrink <= 1.0)
        {
            return Err(Error::Config("sigma_shrink must be in (0, 1]".into()));
        }
        if !(self.elite_weight.is_finite() && (0.0..=1.0).contains(&self.elite_weight)) {
            return Err(Error::Config("elite_weight must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Cheapest possible run: every round must at least afford
    /// `min_instances` full blocks of `candidates_per_round` evaluations.
    pub fn minimum_budget(&self) -> u64 {
        (self.rounds * self.candidates_per_round * self.min_instances) as u64
    }
}

/// What the tuner hands back: the winning configuration and the full story
/// of how it won.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: Candidate,
    /// Round-by-round narration: entrants, instances, every elimination with
    /// its test, and the survivor each round handed to the next.
    pub audit: Vec<String>,
    pub evaluations_used: u64,
}

/// Iterated racing with default knobs; see [`iterated_race_with`].
pub fn iterated_race<R: TargetRunner + ?Sized>(
    space: &ParamSpace,
    runner: &R,
    budget: u64,
    seed: u64,
) -> Result<TuneOutcome> {
    iterated_race_with(space, runner, budget, seed, &IteratedRaceConfig::default())
}

/// Rounds of (sample → race → keep survivors), refining around the survivors
/// with shrinking spread. The first round samples uniformly; later rounds
/// keep the best-ranked survivors as elites and fill the field with
/// truncated-normal perturbations of them. The budget is split evenly across
/// the rounds that remain, so a frugal early round donates its savings
/// onward; total evaluations never exceed `budget`.
pub fn iterated_race_with<R: TargetRunner + ?Sized>(
    space: &ParamSpace,
    runner: &R,
    budget: u64,
    seed: u64,
    config: &IteratedRaceConfig,
) -> Result<TuneOutcome> {
    space.validate()?;
    config.validate()?;
    let minimum = config.minimum_budget();
    if budget < minimum {
        return Err(Error::BudgetTooSmall { minimum, got: budget });
    }

    let mut audit = vec![
        format!(
            "iterated race: {} rounds x {} candidates, alpha = {}, {} correction, budget {budget}",
            config.rounds, config.candidates_per_round, config.alpha, config.correction
        ),
        format!(
            "refinement: sigma starts at {} of each range and shrinks by {} per round; categorical elite weight {}",
            config.sigma_fraction, config.sigma_shrink, config.elite_weight
        ),
    ];
    let mut used: u64 = 0;
    let mut survivors: Vec<Candidate> = Vec::new();
    let mut next_id = 0usize;
    let mut best: Option<Candidate> = None;

    for round in 0..config.rounds {
        let round_seed =
            stable_hash(&[&seed.to_le_bytes(), b"round", &(round as u64).to_le_bytes()]);
        let candidates = if round == 0 {
            let sampled = sample_candidates(space, config.candidates_per_round, round_seed)?;
            next_id = config.candidates_per_round;
            sampled
        } else {
            resample_around(space, &survivors, config, round, round_seed, &mut next_id)
        };
        let base = round * config.instances_per_round;
        let instances: Vec<Instance> =
            (0..config.instances_per_round).map(|i| runner.instance(base + i, seed)).collect();
        // Even share of what is left; a round can only underspend, so every
        // later round keeps at least its minimum share.
        let round_budget = (budget - used) / (config.rounds - round) as u64;
        let race_config = RaceConfig {
            alpha: config.alpha,
            min_instances: config.min_instances,
            budget: round_budget,
            correction: config.correction,
        };
        let state = race(candidates, &instances, runner, &race_config)?;
        used += state.evaluations_used;
        audit.push(format!(
            "round {}: {} candidates, {} instances, {} evaluations, {} eliminations",
            round + 1,
            state.candidates.len(),
            state.instances_used,
            state.evaluations_used,
            state.eliminations.len()
        ));
        for e in &state.eliminations {
            audit.push(format!(
                "round {}: candidate {} eliminated after instance {} by {} ({})",
                round + 1,
                e.candidate,
                e.after_instances,
                e.test,
                e.note
            ));
        }
        survivors = state.ranked_alive();
        let leader = survivors.first().ok_or_else(|| {
            Error::InvalidInput(format!("every candidate failed in round {}", round + 1))
        })?;
        audit.push(format!(
            "round {}: leader is candidate {} ({})",
            round + 1,
            leader.id,
            leader.describe()
        ));
        best = Some(leader.clone());
    }

    let best = best.expect("at least one round ran");
    audit.push(format!(
        "winner: candidate {} ({}); {used} of {budget} evaluations spent",
        best.id,
        best.describe()
    ));
    Ok(TuneOutcome { best, audit, evaluations_used: used })
}

/// Next round's field: the best survivors stay as elites (keeping their
/// ids), the rest are perturbations of randomly chosen elites.
fn resample_around(
    space: &ParamSpace,
    survivors: &[Candidate],
    config: &IteratedRaceConfig,
    round: usize,
    seed: u64,
    next_id: &mut usize,
) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elite_count =
        (config.candidates_per_round / 3).max(1).min(survivors.len().max(1));
    let shrink = config.sigma_shrink.powi(round as i32 - 1);
    let mut field: Vec<Candidate> = survivors.iter().take(elite_count).cloned().collect();
    while field.len() < config.candidates_per_round {
        let parent = field[rng.random_range(0..elite_count)].assignment.clone();
        let assignment = space
            .parameters
            .iter()
            .map(|def| {
                let value = perturb(&def.kind, &parent[&def.name], config, shrink, &mut rng);
                (def.name.clone(), value)
            })
            .collect();
        field.push(Candidate { id: *next_id, assignment });
        *next_id += 1;
    }
    field
}

fn perturb(
    kind: &ParamKind,
    parent: &ParamValue,
    config: &IteratedRaceConfig,
    shrink: f64,
    rng: &mut ChaCha8Rng,
) -> ParamValue {
    match (kind, parent) {
        (ParamKind::Real { low, high }, ParamValue::Real(v)) => {
            let sigma = (high - low) * config.sigma_fraction * shrink;
            ParamValue::Real(truncated_normal(rng, *v, sigma, *low, *high))
        }
        (ParamKind::Integer { low, high }, ParamValue::Integer(v)) => {
            let sigma = (*high - *low) as f64 * config.sigma_fraction * shrink;
            let drawn = truncated_normal(rng, *v as f64, sigma, *low as f64, *high as f64);
            ParamValue::Integer((drawn.round() as i64).clamp(*low, *high))
        }
        (ParamKind::Categorical { options }, ParamValue::Categorical(v)) => {
            if rng.random::<f64>() < config.elite_weight {
                ParamValue::Categorical(v.clone())
            } else {
                ParamValue::Categorical(options[rng.random_range(0..options.len())].clone())
            }
        }
        // A parent produced by this module always matches its kind; if a
        // caller mixed spaces, fall back to a fresh uniform draw.
        (kind, _) => match kind {
            ParamKind::Real { low, high } => ParamValue::Real(rng.random_range(*low..*high)),
            ParamKind::Integer { low, high } => {
                ParamValue::Integer(rng.random_range(*low..=*high))
            }
            ParamKind::Categorical { options } => {
                ParamValue::Categorical(options[rng.random_range(0..options.len())].clone())
            }
        },
    }
}

/// Rejection-sampled normal restricted to `[low, high]`; after 64 misses the
/// mean is clamped in, which only happens when the interval is far out in
/// the tail.
fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, sigma: f64, low: f64, high: f64) -> f64 {
    if sigma <= 0.0 {
        return mean.clamp(low, high);
    }
    let normal = Normal::new(mean, sigma).expect("finite mean and positive sigma");
    for _ in 0..64 {
        let v = normal.sample(rng);
        if low <= v && v <= high {
            return v;
        }
    }
    mean.clamp(low, high)
}

/// Tunes the toolkit's own optimizers: each instance is one function of the
/// suite (cycling, with fresh seeds on every revisit), a candidate's
/// assignment patches the named [`OptimizerConfig`] fields, and the
/// evaluation is the run's final error.
pub struct BuiltinTarget {
    base: OptimizerConfig,
    specs: Vec<FunctionSpec>,
    budget: Budget,
}

impl BuiltinTarget {
    pub fn new(
        base: OptimizerConfig,
        suite: &SuiteDefinition,
        evaluations: usize,
    ) -> Result<BuiltinTarget> {
        base.validate()?;
        let specs = suite.build()?;
        if specs.is_empty() {
            return Err(Error::InvalidInput("tuning needs a non-empty suite".into()));
        }
        Ok(BuiltinTarget { base, specs, budget: Budget::evals_only(evaluations)? })
    }

    /// The base config with the candidate's values written over the fields
    /// they name; unknown names and out-of-range values are config errors, so
    /// a bad space fails fast instead of racing nonsense.
    fn config_for(&self, candidate: &Candidate) -> Result<OptimizerConfig> {
        let mut value = serde_json::to_value(&self.base)?;
        let object = value.as_object_mut().expect("config serializes to an object");
        for (name, v) in &candidate.assignment {
            if !object.contains_key(name) {
                return Err(Error::Config(format!(
                    "parameter '{name}' does not name an optimizer config field"
                )));
            }
            let json = match v {
                ParamValue::Real(x) => serde_json::Value::from(*x),
                ParamValue::Integer(i) => serde_json::Value::from(*i),
                ParamValue::Categorical(s) => serde_json::Value::from(s.clone()),
            };
            object.insert(name.clone(), json);
        }
        let config: OptimizerConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("candidate {}: {e}", candidate.id)))?;
        config.validate().map_err(|e| Error::Config(format!("candidate {}: {e}", candidate.id)))?;
        Ok(config)
    }
}

impl TargetRunner for BuiltinTarget {
    fn evaluate(&self, candidate: &Candidate, instance: &Instance) -> Result<f64> {
        let config = self.config_for(candidate)?;
        let function = instance.id.split('#').next().unwrap_or(&instance.id);
        let spec = self.specs.iter().find(|s| s.id == function).ok_or_else(|| {
            Error::InvalidInput(format!(
                "instance '{}' does not name a function of the tuning suite",
                instance.id
            ))
        })?;
        let trace = run(spec, &config, &self.budget, instance.seed)?;
        if let Some(diagnostic) = &trace.failure {
            return Err(Error::InvalidInput(format!(
                "run failed on '{}': {diagnostic}",
                instance.id
            )));
        }
        Ok(trace.final_error())
    }

    fn instance(&self, index: usize, master_seed: u64) -> Instance {
        let which = index % self.specs.len();
        let revisit = index / self.specs.len();
        Instance {
            id: format!("{}#{revisit}", self.specs[which].id),
            seed: stable_hash(&[
                &master_seed.to_le_bytes(),
                b"tune-instance",
                &(index as u64).to_le_bytes(),
            ]),
        }
    }
}

/// Spawns a user-supplied program per evaluation:
/// `program [args…] --instance <id> --seed <u64> --param <name>=<value>…`,
/// reading one real number (the error) from its standard output. A non-zero
/// exit status is a failed evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalCommand {
    pub program: PathBuf,
    /// Fixed arguments placed before the protocol arguments.
    pub args: Vec<String>,
}

impl ExternalCommand {
    pub fn new(program: impl Into<PathBuf>) -> ExternalCommand {
        ExternalCommand { program: program.into(), args: Vec::new() }
    }
}

impl TargetRunner for ExternalCommand {
    fn evaluate(&self, candidate: &Candidate, instance: &Instance) -> Result<f64> {
        let mut command = Command::new(&self.program);
        command
            .args(&self.args)
            .arg("--instance")
            .arg(&instance.id)
            .arg("--seed")
            .arg(instance.seed.to_string());
        for (name, value) in &candidate.assignment {
            command.arg("--param").arg(format!("{name}={value}"));
        }
        let output = command.output().map_err(|e| {
            Error::Protocol(format!("failed to spawn '{}': {e}", self.program.display()))
        })?;
        if !output.status.success() {
            return Err(Error::Protocol(format!(
                "'{}' exited with {} on instance '{}'",
                self.program.display(),
                output.status,
                instance.id
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let token = stdout.trim();
        let value: f64 = token.parse().map_err(|_| {
            Error::Protocol(format!(
                "'{}' printed '{token}' instead of a single real number",
                self.program.display()
            ))
        })?;
        if !value.is_finite() {
            return Err(Error::Protocol(format!(
                "'{}' printed the non-finite value {value}",
                self.program.display()
            )));
        }
        Ok(value)
    }
}
