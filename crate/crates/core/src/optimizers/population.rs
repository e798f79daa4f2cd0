//! Population engine shared by DE/rand/1/bin and SHADE, plus the two
//! standalone population-based entry points.
//!
//! DE follows the canonical Storn & Price formulation: rand/1 mutation,
//! binomial crossover with one forced donor coordinate, synchronous greedy
//! selection. SHADE (Tanabe & Fukunaga) replaces the fixed `(F, CR)` with
//! per-individual draws from a success-history memory — Cauchy for `F`,
//! Gaussian for `CR` — uses current-to-pbest/1 mutation with an optional
//! external archive of replaced parents, and updates one memory slot per
//! generation with the weighted Lehmer mean of successful `F` values and the
//! weighted arithmetic mean of successful `CR` values.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::benchmark::FunctionSpec;
use crate::error::Result;

use super::{
    diversity, reflect_into, uniform_point, Budget, DeEngine, Evaluator, OptimizerConfig,
    RunTrace,
};

pub(crate) struct Population {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    engine: DeEngine,
    f: f64,
    cr: f64,
    p_best_fraction: f64,
    memory_f: Vec<f64>,
    memory_cr: Vec<f64>,
    memory_pos: usize,
    archive: Vec<Vec<f64>>,
    archive_cap: usize,
}

impl Population {
    /// Samples and evaluates up to `config.population` uniform individuals
    /// (fewer if the budget runs dry mid-initialization).
    pub fn init(
        spec: &FunctionSpec,
        config: &OptimizerConfig,
        engine: DeEngine,
        eval: &mut Evaluator<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Population {
        let mut points = Vec::with_capacity(config.population);
        let mut values = Vec::with_capacity(config.population);
        for _ in 0..config.population {
            if eval.remaining() == 0 {
                break;
            }
            let p = uniform_point(rng, &spec.bounds);
            let v = eval.evaluate(&p);
            points.push(p);
            values.push(v);
        }
        Population {
            points,
            values,
            engine,
            f: config.f,
            cr: config.cr,
            p_best_fraction: config.p_best_fraction,
            memory_f: vec![0.5; config.memory_size],
            memory_cr: vec![0.5; config.memory_size],
            memory_pos: 0,
            archive: Vec::new(),
            archive_cap: (config.archive_rate * config.population as f64).round() as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Index of the best individual by its last seen value.
    pub fn best_index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn replace(&mut self, index: usize, point: Vec<f64>, value: f64) {
        self.points[index] = point;
        self.values[index] = value;
    }

    /// Forgets everything adaptive (success history and archive); used by the
    /// hybrid's full restart.
    pub fn reset_adaptation(&mut self) {
        self.memory_f.fill(0.5);
        self.memory_cr.fill(0.5);
        self.memory_pos = 0;
        self.archive.clear();
    }

    /// One synchronous generation: trials are built against the incoming
    /// population, evaluated one at a time (stopping at the budget or at
    /// `used_cap`), then replacements commit. Returns how many trials were
    /// evaluated.
    pub fn generation(
        &mut self,
        eval: &mut Evaluator<'_>,
        rng: &mut ChaCha8Rng,
        used_cap: usize,
    ) -> usize {
        let np = self.len();
        if np < 4 {
            return 0;
        }
        let by_value = self.indices_by_value();
        let mut replacements: Vec<(usize, Vec<f64>, f64)> = Vec::new();
        let mut successful_f = Vec::new();
        let mut successful_cr = Vec::new();
        let mut success_weights = Vec::new();
        let mut evaluated = 0;
        for i in 0..np {
            if eval.remaining() == 0 || eval.used() >= used_cap {
                break;
            }
            let (trial, f_i, cr_i) = self.make_trial(i, &by_value, eval.spec(), rng);
            let trial_value = eval.evaluate(&trial);
            evaluated += 1;
            if trial_value <= self.values[i] {
                if trial_value < self.values[i] {
                    successful_f.push(f_i);
                    successful_cr.push(cr_i);
                    success_weights.push(self.values[i] - trial_value);
                    if self.archive_cap > 0 {
                        self.archive.push(self.points[i].clone());
                        if self.archive.len() > self.archive_cap {
                            let evict = rng.random_range(0..self.archive.len());
                            self.archive.swap_remove(evict);
                        }
                    }
                }
                replacements.push((i, trial, trial_value));
            }
        }
        for (i, point, value) in replacements {
            self.points[i] = point;
            self.values[i] = value;
        }
        if self.engine == DeEngine::Shade {
            update_memory(
                &mut self.memory_f,
                &mut self.memory_cr,
                &mut self.memory_pos,
                &successful_f,
                &successful_cr,
                &success_weights,
            );
        }
        evaluated
    }

    fn indices_by_value(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|a, b| self.values[*a].total_cmp(&self.values[*b]));
        idx
    }

    fn make_trial(
        &self,
        i: usize,
        by_value: &[usize],
        spec: &FunctionSpec,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<f64>, f64, f64) {
        let np = self.len();
        let dim = spec.dimension;
        let (donor, f_i, cr_i): (Vec<f64>, f64, f64) = match self.engine {
            DeEngine::De => {
                let r1 = draw_excluding(rng, np, &[i]);
                let r2 = draw_excluding(rng, np, &[i, r1]);
                let r3 = draw_excluding(rng, np, &[i, r1, r2]);
                let donor = (0..dim)
                    .map(|d| {
                        self.points[r1][d] + self.f * (self.points[r2][d] - self.points[r3][d])
                    })
                    .collect();
                (donor, self.f, self.cr)
            }
            DeEngine::Shade => {
                let k = rng.random_range(0..self.memory_f.len());
                let f_i = sample_shade_f(self.memory_f[k], rng);
                let cr_i = sample_shade_cr(self.memory_cr[k], rng);
                let p_num =
                    ((self.p_best_fraction * np as f64).ceil() as usize).clamp(2, np);
                let pbest = by_value[rng.random_range(0..p_num)];
                let r1 = draw_excluding(rng, np, &[i]);
                // r2 comes from population ∪ archive.
                let pool = np + self.archive.len();
                let mut r2 = rng.random_range(0..pool);
                while r2 == i || r2 == r1 {
                    r2 = rng.random_range(0..pool);
                }
                let x_r2 = if r2 < np { &self.points[r2] } else { &self.archive[r2 - np] };
                let donor = (0..dim)
                    .map(|d| {
                        self.points[i][d]
                            + f_i * (self.points[pbest][d] - self.points[i][d])
                            + f_i * (self.points[r1][d] - x_r2[d])
                    })
                    .collect();
                (donor, f_i, cr_i)
            }
        };
        // Binomial crossover with a forced donor coordinate, then reflection
        // repair into the box.
        let j_rand = rng.random_range(0..dim);
        let trial = (0..dim)
            .map(|j| {
                let gene = if j == j_rand || rng.random::<f64>() < cr_i {
                    donor[j]
                } else {
                    self.points[i][j]
                };
                let (lo, hi) = spec.bounds[j];
                reflect_into(gene, lo, hi)
            })
            .collect();
        (trial, f_i, cr_i)
    }
}

/// SHADE `F` draw: Cauchy around the memory value with scale 0.1, redrawn
/// while nonpositive, truncated to 1 from above.
fn sample_shade_f(location: f64, rng: &mut ChaCha8Rng) -> f64 {
    let dist = rand_distr::Cauchy::new(location, 0.1).expect("valid Cauchy scale");
    for _ in 0..10_000 {
        let f = dist.sample(rng);
        if f > 0.0 {
            return f.min(1.0);
        }
    }
    // Unreachable in practice (each draw is positive with probability > 0.5
    // for any nonnegative location); fall back to the memory value.
    location.clamp(f64::MIN_POSITIVE, 1.0)
}

/// SHADE `CR` draw: Gaussian around the memory value with σ 0.1, clipped to
/// [0, 1].
fn sample_shade_cr(location: f64, rng: &mut ChaCha8Rng) -> f64 {
    let dist = rand_distr::Normal::new(location, 0.1).expect("valid Normal sigma");
    dist.sample(rng).clamp(0.0, 1.0)
}

/// One SHADE memory-slot update. No successes → no change (and the slot
/// cursor stays put). Returns whether an update happened.
pub(crate) fn update_memory(
    memory_f: &mut [f64],
    memory_cr: &mut [f64],
    pos: &mut usize,
    successful_f: &[f64],
    successful_cr: &[f64],
    weights: &[f64],
) -> bool {
    if successful_f.is_empty() {
        return false;
    }
    let lehmer_num: f64 = successful_f.iter().zip(weights).map(|(f, w)| w * f * f).sum();
    let lehmer_den: f64 = successful_f.iter().zip(weights).map(|(f, w)| w * f).sum();
    let weight_sum: f64 = weights.iter().sum();
    if lehmer_den > 0.0 && weight_sum > 0.0 {
        memory_f[*pos] = lehmer_num / lehmer_den;
        memory_cr[*pos] =
            successful_cr.iter().zip(weights).map(|(cr, w)| w * cr).sum::<f64>() / weight_sum;
        *pos = (*pos + 1) % memory_f.len();
        true
    } else {
        false
    }
}

fn draw_excluding(rng: &mut ChaCha8Rng, n: usize, exclude: &[usize]) -> usize {
    loop {
        let r = rng.random_range(0..n);
        if !exclude.contains(&r) {
            return r;
        }
    }
}

fn run_population(
    spec: &FunctionSpec,
    config: &OptimizerConfig,
    engine: DeEngine,
    budget: &Budget,
    seed: u64,
) -> Result<RunTrace> {
    config.validate()?;
    let mut eval = Evaluator::new(spec, budget, seed);
    let diversity_at = run_population_core(&mut eval, config, engine, seed);
    Ok(eval.finish(diversity_at))
}

pub(crate) fn run_population_core(
    eval: &mut Evaluator,
    config: &OptimizerConfig,
    engine: DeEngine,
    seed: u64,
) -> BTreeMap<usize, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = eval.spec();
    let mut pop = Population::init(spec, config, engine, eval, &mut rng);
    let mut diversity_at = BTreeMap::new();
    let mut generation = 0;
    diversity_at.insert(generation, diversity(&pop.points, &spec.bounds));
    while eval.remaining() > 0 && pop.len() >= 4 {
        pop.generation(eval, &mut rng, usize::MAX);
        generation += 1;
        diversity_at.insert(generation, diversity(&pop.points, &spec.bounds));
    }
    diversity_at
}

/// Canonical DE/rand/1/bin with fixed `(F, CR)`.
pub fn de_rand_1_bin(
    spec: &FunctionSpec,
    config: &OptimizerConfig,
    budget: &Budget,
    seed: u64,
) -> Result<RunTrace> {
    run_population(spec, config, DeEngine::De, budget, seed)
}

/// SHADE: success-history adaptive DE with current-to-pbest/1 mutation and an
/// optional archive.
pub fn shade(
    spec: &FunctionSpec,
    config: &OptimizerConfig,
    budget: &Budget,
    seed: u64,
) -> Result<RunTrace> {
    run_population(spec, config, DeEngine::Shade, budget, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::BaseFunction;
    use crate::util::median;

    fn sphere(dim: usize) -> FunctionSpec {
        FunctionSpec::base(BaseFunction::Sphere, dim).expect("valid")
    }

    #[test]
    fn invalid_f_and_cr_are_config_errors() {
        let spec = sphere(3);
        let budget = Budget::evals_only(100).unwrap();
        let mut config = OptimizerConfig::for_algorithm(super::super::Algorithm::DeRand1Bin);
        config.f = 2.5;
        assert!(de_rand_1_bin(&spec, &config, &budget, 0).is_err());
        config.f = 0.5;
        config.cr = -0.1;
        assert!(de_rand_1_bin(&spec, &config, &budget, 0).is_err());
    }

    #[test]
    fn degenerate_f0_cr1_only_duplicates_existing_members() {
        // With F = 0 and CR = 1 every trial equals an existing member, so the
        // population can only ever contain (copies of) initial individuals.
        let spec = sphere(3);
        let budget = Budget::evals_only(500).unwrap();
        let mut config = OptimizerConfig::for_algorithm(super::super::Algorithm::DeRand1Bin);
        config.f = 0.0;
        config.cr = 1.0;
        config.population = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut eval = Evaluator::new(&spec, &budget, 3);
        let mut pop = Population::init(&spec, &config, DeEngine::De, &mut eval, &mut rng);
        let initial = pop.points.clone();
        while eval.remaining() > 0 {
            pop.generation(&mut eval, &mut rng, usize::MAX);
        }
        for member in &pop.points {
            assert!(
                initial.iter().any(|p| p == member),
                "member {member:?} is not an initial individual"
            );
        }
    }

    #[test]
    fn single_success_lehmer_update_writes_exactly_that_f() {
        let mut mem_f = vec![0.5; 4];
        let mut mem_cr = vec![0.5; 4];
        let mut pos = 0;
        let updated =
            update_memory(&mut mem_f, &mut mem_cr, &mut pos, &[0.5], &[0.75], &[2.0]);
        assert!(updated);
        assert_eq!(mem_f[0], 0.5);
        assert_eq!(mem_cr[0], 0.75);
        assert_eq!(pos, 1);
    }

    #[test]
    fn no_success_leaves_memory_unchanged() {
        let mut mem_f = vec![0.3, 0.4];
        let mut mem_cr = vec![0.6, 0.7];
        let mut pos = 1;
        let updated = update_memory(&mut mem_f, &mut mem_cr, &mut pos, &[], &[], &[]);
        assert!(!updated);
        assert_eq!(mem_f, vec![0.3, 0.4]);
        assert_eq!(mem_cr, vec![0.6, 0.7]);
        assert_eq!(pos, 1);
    }

    #[test]
    fn weighted_lehmer_mean_favors_larger_f() {
        let mut mem_f = vec![0.5];
        let mut mem_cr = vec![0.5];
        let mut pos = 0;
        update_memory(&mut mem_f, &mut mem_cr, &mut pos, &[0.2, 0.8], &[0.5, 0.5], &[1.0, 1.0]);
        // Lehmer mean (0.04 + 0.64)/(0.2 + 0.8) = 0.68 > arithmetic 0.5.
        assert!((mem_f[0] - 0.68).abs() < 1e-15);
        assert!((mem_cr[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn memory_slot_cursor_wraps_around() {
        let mut mem_f = vec![0.5; 2];
        let mut mem_cr = vec![0.5; 2];
        let mut pos = 0;
        for f in [0.1, 0.2, 0.3] {
            update_memory(&mut mem_f, &mut mem_cr, &mut pos, &[f], &[0.5], &[1.0]);
        }
        assert_eq!(pos, 1);
        assert!((mem_f[0] - 0.3).abs() < 1e-15, "third update overwrote slot 0");
        assert!((mem_f[1] - 0.2).abs() < 1e-15);
    }

    /// Pinned regression value: plain DE on the 10-D sphere with the default
    /// NP = 50, F = 0.5, CR = 0.9 reliably reaches 1e-6 in 1e5 evaluations.
    #[test]
    fn de_solves_the_sphere_and_shade_does_not_do_worse() {
        let spec = sphere(10);
        let budget = Budget::evals_only(100_000).unwrap();
        let de_config = OptimizerConfig::for_algorithm(super::super::Algorithm::DeRand1Bin);
        let shade_config = OptimizerConfig::for_algorithm(super::super::Algorithm::Shade);
        let mut de_errors = Vec::new();
        let mut shade_errors = Vec::new();
        for seed in 0..25u64 {
            de_errors.push(de_rand_1_bin(&spec, &de_config, &budget, seed).unwrap().final_error());
            shade_errors.push(shade(&spec, &shade_config, &budget, seed).unwrap().final_error());
        }
        let de_median = median(&de_errors);
        let shade_median = median(&shade_errors);
        assert!(de_median < 1e-6, "DE median {de_median:e} (expected < 1e-6)");
        assert!(
            shade_median <= de_median,
            "SHADE median {shade_median:e} worse than DE median {de_median:e}"
        );
    }

    #[test]
    fn archive_zero_rate_disables_the_archive() {
        let spec = sphere(4);
        let budget = Budget::evals_only(400).unwrap();
        let mut config = OptimizerConfig::for_algorithm(super::super::Algorithm::Shade);
        config.archive_rate = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut eval = Evaluator::new(&spec, &budget, 1);
        let mut pop = Population::init(&spec, &config, DeEngine::Shade, &mut eval, &mut rng);
        while eval.remaining() > 0 {
            pop.generation(&mut eval, &mut rng, usize::MAX);
        }
        assert!(pop.archive.is_empty());
    }

    #[test]
    fn population_values_match_points_under_no_noise() {
        // The stored value of every individual must be its true objective
        // value; selection correctness depends on it.
        let spec = sphere(3);
        let budget = Budget::evals_only(300).unwrap();
        let config = OptimizerConfig::for_algorithm(super::super::Algorithm::Shade);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut eval = Evaluator::new(&spec, &budget, 8);
        let mut pop = Population::init(&spec, &config, DeEngine::Shade, &mut eval, &mut rng);
        while eval.remaining() > 0 {
            pop.generation(&mut eval, &mut rng, usize::MAX);
        }
        for (p, v) in pop.points.iter().zip(&pop.values) {
            assert_eq!(spec.evaluate(p).unwrap(), *v);
        }
    }
}
