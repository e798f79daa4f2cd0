//! MTS-LS1: the first local-search method of the Multiple Trajectory Search
//! (Tseng & Chen), a coordinate-wise line search with an adaptive step.
//!
//! Per dimension it tries a step of `−step·range`; on failure it undoes the
//! move and tries `+step·range/2`; only strict improvements are kept, so the
//! search never returns a point worse than its input. When a full sweep
//! produces no improvement the step halves; once it falls below the tolerance
//! the state records stagnation and the search stops consuming budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmark::FunctionSpec;
use crate::error::{Error, Result};

use super::{reflect_into, uniform_point, Budget, Evaluator, OptimizerConfig};

/// Adaptive state carried between MTS-LS1 invocations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsState {
    /// Current step as a fraction of each coordinate's range.
    pub step: f64,
    /// Step below which the search declares stagnation.
    pub tolerance: f64,
    /// Set once the step shrank below the tolerance; the search is inert
    /// until the state is reset.
    pub stagnated: bool,
}

impl Default for LsState {
    fn default() -> Self {
        LsState { step: 0.2, tolerance: 1e-12, stagnated: false }
    }
}

impl LsState {
    pub fn new(step: f64, tolerance: f64) -> LsState {
        LsState { step, tolerance, stagnated: false }
    }
}

/// One budgeted MTS-LS1 invocation from `start`. Returns the improved (never
/// worse) point and the updated state. A zero budget returns the input
/// unchanged.
pub fn mts_ls1(
    spec: &FunctionSpec,
    start: &[f64],
    ls_budget: usize,
    state: LsState,
    seed: u64,
) -> Result<(Vec<f64>, LsState)> {
    if start.len() != spec.dimension {
        return Err(Error::InvalidInput(format!(
            "start point has dimension {}, expected {}",
            start.len(),
            spec.dimension
        )));
    }
    if !spec.in_bounds(start) {
        return Err(Error::InvalidInput("start point is out of bounds".into()));
    }
    if ls_budget == 0 {
        return Ok((start.to_vec(), state));
    }
    let budget = Budget::evals_only(ls_budget)?;
    let mut eval = Evaluator::new(spec, &budget, seed);
    let mut x = start.to_vec();
    let mut value = eval.evaluate(&x);
    let mut state = state;
    ls_core(&mut eval, &mut x, &mut value, &mut state, usize::MAX);
    Ok((x, state))
}

/// The sweep loop, shared with the hybrid (which caps it at a per-phase
/// evaluation allotment). `x`/`value` always hold the best accepted point, so
/// an exit at any evaluation leaves them consistent.
pub(crate) fn ls_core(
    eval: &mut Evaluator<'_>,
    x: &mut [f64],
    value: &mut f64,
    state: &mut LsState,
    used_cap: usize,
) {
    let dimension = x.len();
    loop {
        if state.step < state.tolerance {
            state.stagnated = true;
        }
        if state.stagnated || eval.remaining() == 0 || eval.used() >= used_cap {
            return;
        }
        let mut improved = false;
        for d in 0..dimension {
            if eval.remaining() == 0 || eval.used() >= used_cap {
                return;
            }
            let (lo, hi) = eval.spec().bounds[d];
            let range = hi - lo;
            let old = x[d];
            x[d] = reflect_into(old - state.step * range, lo, hi);
            let v = eval.evaluate(x);
            if v < *value {
                *value = v;
                improved = true;
            } else {
                x[d] = old;
                if eval.remaining() == 0 || eval.used() >= used_cap {
                    return;
                }
                x[d] = reflect_into(old + 0.5 * state.step * range, lo, hi);
                let v = eval.evaluate(x);
                if v < *value {
                    *value = v;
                    improved = true;
                } else {
                    x[d] = old;
                }
            }
        }
        if !improved {
            state.step *= 0.5;
        }
    }
}

/// Budget-long driver: restarts from a fresh uniform point (with a fresh
/// step) whenever the search stagnates, until the budget ends. This is the
/// "MTS-LS1 alone" column in component comparisons.
pub(crate) fn mts_ls1_core(eval: &mut Evaluator, config: &OptimizerConfig, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = eval.spec();
    while eval.remaining() > 0 {
        let mut x = uniform_point(&mut rng, &spec.bounds);
        let mut value = eval.evaluate(&x);
        let mut state = LsState::new(config.ls_initial_step, config.ls_step_tolerance);
        ls_core(eval, &mut x, &mut value, &mut state, usize::MAX);
    }
}
