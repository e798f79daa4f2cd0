//! Iterated-local-search hybrid: alternates a population phase (DE or SHADE,
//! per toggle) with an MTS-LS1 phase on the current best, restarting when a
//! cycle's relative improvement stalls.
//!
//! The two component toggles — population engine `{de, shade}` and restart
//! behavior `{old, new, off}` — exist so an ablation can flip exactly one
//! design decision at a time while everything else (seeds included) stays
//! fixed. The global best is tracked outside the population and is never
//! lost, no matter how aggressively restarts reshuffle the working state.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmark::FunctionSpec;
use crate::error::Result;

use super::ls::ls_core;
use super::population::Population;
use super::{
    diversity, reflect_into, Budget, Evaluator, LsState, OptimizerConfig, RestartMode, RunTrace,
};

/// Fraction of each coordinate's range used to perturb the best point when a
/// full restart reseeds the population around it.
const RESTART_PERTURBATION: f64 = 0.1;

pub fn ils_hybrid(
    spec: &FunctionSpec,
    config: &OptimizerConfig,
    budget: &Budget,
    seed: u64,
) -> Result<RunTrace> {
    config.validate()?;
    let mut eval = Evaluator::new(spec, budget, seed);
    let diversity_at = ils_hybrid_core(&mut eval, config, seed);
    Ok(eval.finish(diversity_at))
}

pub(crate) fn ils_hybrid_core(
    eval: &mut Evaluator,
    config: &OptimizerConfig,
    seed: u64,
) -> BTreeMap<usize, f64> {
    let spec = eval.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diversity_at = BTreeMap::new();
    let mut generation = 0;

    let mut pop = Population::init(spec, config, config.de_engine, eval, &mut rng);
    diversity_at.insert(generation, diversity(&pop.points, &spec.bounds));
    let mut ls_state = LsState::new(config.ls_initial_step, config.ls_step_tolerance);

    let ls_share =
        ((config.cycle_evaluations as f64) * config.ls_fraction).round() as usize;
    let pop_share = config.cycle_evaluations - ls_share;

    while eval.remaining() > 0 && pop.len() >= 4 {
        let previous_best = eval.best_error();

        // Population phase.
        let cap = eval.used().saturating_add(pop_share);
        while eval.used() < cap && eval.remaining() > 0 {
            pop.generation(eval, &mut rng, cap);
            generation += 1;
            diversity_at.insert(generation, diversity(&pop.points, &spec.bounds));
        }

        // Local-search phase on the population's current best member.
        if ls_share > 0 && eval.remaining() > 0 {
            let best = pop.best_index();
            let mut x = pop.points[best].clone();
            let mut value = pop.values[best];
            let cap = eval.used().saturating_add(ls_share);
            ls_core(eval, &mut x, &mut value, &mut ls_state, cap);
            if value < pop.values[best] {
                pop.replace(best, x, value);
            }
        }

        // Relative improvement over the whole cycle decides the restart. An
        // already-solved run (error 0) counts as fully improving: restarting
        // cannot help and would only churn.
        let new_best = eval.best_error();
        let improvement = if previous_best == 0.0 {
            1.0
        } else {
            (previous_best - new_best) / previous_best
        };
        if improvement < config.restart_threshold {
            match config.restart {
                RestartMode::Off => {}
                RestartMode::Old => {
                    ls_state = LsState::new(config.ls_initial_step, config.ls_step_tolerance);
                }
                RestartMode::New => {
                    ls_state = LsState::new(config.ls_initial_step, config.ls_step_tolerance);
                    pop.reset_adaptation();
                    let anchor = eval.best_point().to_vec();
                    for i in 0..pop.len() {
                        if eval.remaining() == 0 {
                            break;
                        }
                        let point = if i == 0 {
                            // Keep the incumbent in the working population.
                            anchor.clone()
                        } else {
                            perturb_around(&anchor, spec, &mut rng)
                        };
                        let value = eval.evaluate(&point);
                        pop.replace(i, point, value);
                    }
                }
            }
        }
    }
    diversity_at
}

fn perturb_around(
    anchor: &[f64],
    spec: &FunctionSpec,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    anchor
        .iter()
        .zip(&spec.bounds)
        .map(|(a, (lo, hi))| {
            let radius = RESTART_PERTURBATION * (hi - lo);
            reflect_into(a + rng.random_range(-radius..radius), *lo, *hi)
        })
        .collect()
}
