//! Point-based baselines: uniform random search (the unbiased yardstick the
//! structural-bias probe is calibrated on) and a deliberately center-biased
//! control that the probe must flag.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::benchmark::FunctionSpec;

use super::{reflect_into, uniform_point, Budget, Evaluator, RunTrace};

/// Uniform i.i.d. sampling within the bounds with best-so-far tracking.
pub fn random_search(spec: &FunctionSpec, budget: &Budget, seed: u64) -> RunTrace {
    let mut eval = Evaluator::new(spec, budget, seed);
    random_search_core(&mut eval, seed);
    eval.finish(BTreeMap::new())
}

pub(crate) fn random_search_core(eval: &mut Evaluator, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = eval.spec().bounds.clone();
    while eval.remaining() > 0 {
        let x = uniform_point(&mut rng, &bounds);
        eval.evaluate(&x);
    }
}

/// Structurally biased control: every step contracts the walker toward the
/// box center (plus a little jitter), regardless of what the objective says.
/// On a pure-noise objective its visited — and therefore best — points pile
/// up at the center, which is exactly the pathology the bias probe exists to
/// detect.
pub fn center_pull(spec: &FunctionSpec, budget: &Budget, seed: u64) -> RunTrace {
    let mut eval = Evaluator::new(spec, budget, seed);
    center_pull_core(&mut eval, seed);
    eval.finish(BTreeMap::new())
}

pub(crate) fn center_pull_core(eval: &mut Evaluator, seed: u64) {
    const CONTRACTION: f64 = 0.8;
    const JITTER: f64 = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = eval.spec().bounds.clone();
    let dimension = eval.spec().dimension;
    let center: Vec<f64> = bounds.iter().map(|(lo, hi)| lo + 0.5 * (hi - lo)).collect();
    let mut x = uniform_point(&mut rng, &bounds);
    while eval.remaining() > 0 {
        eval.evaluate(&x);
        for d in 0..dimension {
            let (lo, hi) = bounds[d];
            let z: f64 = rng.sample(StandardNormal);
            let pulled = center[d] + CONTRACTION * (x[d] - center[d]) + JITTER * (hi - lo) * z;
            x[d] = reflect_into(pulled, lo, hi);
        }
    }
}
