//! Budget-owning evaluation wrapper shared by every optimizer.
//!
//! The evaluator is the single point through which optimizers see the
//! objective. It enforces the evaluation budget, applies the function's noise
//! model from a run-local stream, tracks the best-so-far *noiseless* error
//! (what benchmarking reports), records that error at each checkpoint, and
//! turns non-finite evaluations into a recorded failure instead of letting
//! them poison comparisons.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmark::FunctionSpec;
use crate::util::stable_hash;

use super::{Budget, RunTrace};

pub(crate) struct Evaluator<'a> {
    spec: &'a FunctionSpec,
    max_evaluations: usize,
    checkpoints: &'a [usize],
    next_checkpoint: usize,
    used: usize,
    best_error: f64,
    best_point: Vec<f64>,
    best_error_at: BTreeMap<usize, f64>,
    noise_rng: Option<ChaCha8Rng>,
    failure: Option<String>,
    /// Structural-bias probe mode: every evaluation returns fresh uniform
    /// noise and the landscape is ignored entirely.
    probe: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a FunctionSpec, budget: &'a Budget, run_seed: u64) -> Self {
        // The noise stream mixes the function's noise seed with the run seed:
        // distinct runs see independent noise, yet each run is replayable.
        let noise_rng = spec.noise.map(|ns| {
            ChaCha8Rng::seed_from_u64(stable_hash(&[
                &ns.seed.to_le_bytes(),
                &run_seed.to_le_bytes(),
                b"noise-stream",
            ]))
        });
        Evaluator {
            spec,
            max_evaluations: budget.max_evaluations(),
            checkpoints: budget.checkpoints(),
            next_checkpoint: 0,
            used: 0,
            best_error: f64::INFINITY,
            best_point: Vec::new(),
            best_error_at: BTreeMap::new(),
            noise_rng,
            failure: None,
            probe: false,
        }
    }

    /// Evaluator for the structural-bias protocol: the spec supplies only the
    /// box (dimension and bounds); every evaluation returns an independent
    /// U(0, 1) draw, so selection pressure is pure noise and any spatial
    /// structure in the recorded best points comes from the optimizer itself.
    pub fn new_probe(spec: &'a FunctionSpec, budget: &'a Budget, run_seed: u64) -> Self {
        let mut eval = Evaluator::new(spec, budget, run_seed);
        eval.probe = true;
        eval.noise_rng = Some(ChaCha8Rng::seed_from_u64(stable_hash(&[
            &run_seed.to_le_bytes(),
            b"uniform-probe",
        ])));
        eval
    }

    pub fn spec(&self) -> &'a FunctionSpec {
        self.spec
    }

    pub fn used(&self) -> usize {
        self.used
    }

    /// Evaluations still available; 0 once the run has failed, so optimizer
    /// loops wind down without extra checks.
    pub fn remaining(&self) -> usize {
        if self.failure.is_some() {
            0
        } else {
            self.max_evaluations - self.used
        }
    }

    pub fn best_error(&self) -> f64 {
        self.best_error
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    /// Evaluates an in-bounds point, returning the value the optimizer is
    /// allowed to see (noisy when the function carries noise).
    pub fn evaluate(&mut self, x: &[f64]) -> f64 {
        assert!(self.remaining() > 0, "evaluation budget overrun");
        debug_assert!(self.spec.in_bounds(x), "optimizer produced an out-of-bounds point: {x:?}");
        self.used += 1;
        let (visible, error) = if self.probe {
            // Pure-noise objective. The "error" is the noise value itself, so
            // the tracked best is the point where the optimizer saw its best
            // value — exactly what the bias analysis inspects.
            let v: f64 = self.noise_rng.as_mut().expect("probe mode owns a stream").random();
            (v, v)
        } else {
            let raw = match self.spec.evaluate(x) {
                Ok(v) => v,
                Err(e) => {
                    self.fail(e.to_string());
                    return f64::INFINITY;
                }
            };
            let visible = match (&self.spec.noise, &mut self.noise_rng) {
                (Some(ns), Some(rng)) => ns.apply(raw, rng),
                _ => raw,
            };
            if !raw.is_finite() || !visible.is_finite() {
                self.fail(format!(
                    "non-finite evaluation of {} at evaluation {} (raw = {raw}, seen = {visible})",
                    self.spec.id, self.used
                ));
                return f64::INFINITY;
            }
            let error = self.spec.error_of(raw);
            debug_assert!(error > -1e-12, "value below the known optimum: error = {error}");
            (visible, error.max(0.0))
        };
        if error < self.best_error {
            self.best_error = error;
            self.best_point.clear();
            self.best_point.extend_from_slice(x);
        }
        while self.next_checkpoint < self.checkpoints.len()
            && self.checkpoints[self.next_checkpoint] == self.used
        {
            self.best_error_at.insert(self.used, self.best_error);
            self.next_checkpoint += 1;
        }
        visible
    }

    fn fail(&mut self, message: String) {
        if self.failure.is_none() {
            self.failure = Some(message);
        }
    }

    /// Seals the run. Checkpoints the optimizer never reached report the best
    /// error achieved with the evaluations actually spent, which is a valid
    /// "by checkpoint c" value since fewer than c were used.
    pub fn finish(mut self, diversity_at: BTreeMap<usize, f64>) -> RunTrace {
        for cp in &self.checkpoints[self.next_checkpoint..] {
            self.best_error_at.insert(*cp, self.best_error);
        }
        RunTrace {
            best_error_at: self.best_error_at,
            final_best: self.best_point,
            diversity_at,
            evaluations_used: self.used,
            failure: self.failure,
        }
    }
}
