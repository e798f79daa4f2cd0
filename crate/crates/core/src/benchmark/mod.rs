//! Benchmark suite construction: catalog functions, bias-avoidance transform
//! chains (shift / rotation / noise), and feature tagging for grouped
//! analysis.
//!
//! A benchmark whose optima sit at the center of the search box, aligned with
//! the axes, rewards algorithms biased toward those structures rather than
//! genuinely better ones. Suites built here therefore relocate each optimum
//! (away from the center *and* the bounds), optionally rotate the coordinate
//! system, and optionally add evaluation noise — with per-function seeds
//! derived from one master seed so the whole suite is reproducible from its
//! manifest.

mod functions;
mod rotation;

pub use functions::{BaseFunction, Tag, CATALOG};
pub use rotation::{orthogonality_defect, random_orthogonal};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::stable_hash;

/// Evaluation-noise model; both are unbiased (the expected noisy value equals
/// the noiseless value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `f·(1 + magnitude·Z)`, `Z ~ N(0,1)`.
    GaussianMultiplicative,
    /// `f + magnitude·Z`, `Z ~ N(0,1)`.
    GaussianAdditive,
}

/// Noise attachment for a function: model, magnitude and the seed from which
/// per-run evaluation streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub magnitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Applies noise to a raw value using the caller's RNG stream. Magnitude
    /// zero is the identity bit-for-bit and consumes no randomness.
    pub fn apply<R: rand::Rng>(&self, value: f64, rng: &mut R) -> f64 {
        if self.magnitude == 0.0 {
            return value;
        }
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        match self.model {
            NoiseModel::GaussianMultiplicative => value * (1.0 + self.magnitude * z),
            NoiseModel::GaussianAdditive => value + self.magnitude * z,
        }
    }
}

/// A shift / rotation / noise bundle to apply to a base function.
///
/// Composition order is fixed: the evaluation point is expressed relative to
/// the shifted optimum, rotated, passed to the base function, and noise (if
/// any) is applied to the resulting value by the evaluation stream that owns
/// the run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransformChain {
    pub shift: Option<Vec<f64>>,
    pub rotation: Option<Vec<Vec<f64>>>,
    pub noise: Option<NoiseSpec>,
}

/// A fully specified objective: base form, dimension, box, transforms, and
/// exactly known optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    /// Stable identifier (the catalog key), used as the join key in archives.
    pub id: String,
    /// Human-readable name for tables and charts.
    pub name: String,
    pub base: BaseFunction,
    pub dimension: usize,
    /// Per-dimension `(low, high)`.
    pub bounds: Vec<(f64, f64)>,
    /// Global optimum; [`FunctionSpec::evaluate`] returns exactly [`Self::bias`] here
    /// (noise disabled).
    pub optimum_location: Vec<f64>,
    /// Value at the optimum (error = value − bias).
    pub bias: f64,
    pub tags: BTreeSet<Tag>,
    /// Present when shifted; the classic shift vector `s` in `f(Q(x − s))`.
    pub shift: Option<Vec<f64>>,
    /// Present when rotated; row-major orthogonal matrix.
    pub rotation: Option<Vec<Vec<f64>>>,
    /// Present when noisy; noise is applied by the evaluation stream, not by
    /// [`FunctionSpec::evaluate`] itself, so that each run owns its stream.
    pub noise: Option<NoiseSpec>,
}

impl FunctionSpec {
    /// An untransformed catalog function over its classic box.
    pub fn base(function: BaseFunction, dimension: usize) -> Result<FunctionSpec> {
        if dimension < function.min_dimension() {
            return Err(Error::SizeError(format!(
                "{} requires dimension ≥ {}, got {dimension}",
                function.key(),
                function.min_dimension()
            )));
        }
        let (low, high) = function.default_bounds();
        Ok(FunctionSpec {
            id: function.key().to_string(),
            name: function.display_name().to_string(),
            base: function,
            dimension,
            bounds: vec![(low, high); dimension],
            optimum_location: function.base_optimum(dimension),
            bias: 0.0,
            tags: function.base_tags().iter().copied().collect(),
            shift: None,
            rotation: None,
            noise: None,
        })
    }

    /// Noise-free objective value at `x`.
    ///
    /// The point is expressed relative to the stored optimum (`y = x − x*`),
    /// rotated, re-based onto the base optimum, and passed to the base form:
    /// every step maps `x = x*` to exactly the base optimum, so the result at
    /// the optimum is exactly `bias`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "{}: point has dimension {}, expected {}",
                self.id,
                x.len(),
                self.dimension
            )));
        }
        let y: Vec<f64> = x
            .iter()
            .zip(&self.optimum_location)
            .map(|(xi, oi)| xi - oi)
            .collect();
        let base_opt = self.base.base_optimum(self.dimension);
        let z: Vec<f64> = match &self.rotation {
            Some(q) => {
                let mut z = rotation::matvec(q, &y);
                for (zi, bi) in z.iter_mut().zip(&base_opt) {
                    *zi += bi;
                }
                z
            }
            None => y.iter().zip(&base_opt).map(|(yi, bi)| yi + bi).collect(),
        };
        Ok(self.base.eval(&z) + self.bias)
    }

    /// Error of a raw objective value: `value − bias` (zero is optimal).
    pub fn error_of(&self, value: f64) -> f64 {
        value - self.bias
    }

    /// True if `x` lies inside the box (inclusive).
    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.dimension
            && x.iter()
                .zip(&self.bounds)
                .all(|(xi, (lo, hi))| *lo <= *xi && *xi <= *hi)
    }
}

/// Applies a transform chain to an *untransformed* spec.
///
/// The returned spec has its optimum relocated to `s + Qᵀb` (`b` = base
/// optimum), gains the matching tags, and — if rotated — loses `separable`,
/// since rotation destroys additive separability in general.
pub fn apply_chain(spec: &FunctionSpec, chain: &TransformChain) -> Result<FunctionSpec> {
    if spec.shift.is_some() || spec.rotation.is_some() || spec.noise.is_some() {
        return Err(Error::InvalidTransform(format!(
            "{} already carries transforms; chains apply to base functions only",
            spec.id
        )));
    }
    let mut out = spec.clone();

    if let Some(q) = &chain.rotation {
        if q.len() != spec.dimension || q.iter().any(|row| row.len() != spec.dimension) {
            return Err(Error::InvalidTransform(format!(
                "rotation matrix shape does not match dimension {}",
                spec.dimension
            )));
        }
        let defect = rotation::orthogonality_defect(q);
        if defect > 1e-10 {
            return Err(Error::InvalidTransform(format!(
                "rotation matrix is not orthogonal: ‖QᵀQ − I‖∞ = {defect:e}"
            )));
        }
        out.rotation = Some(q.clone());
        out.tags.insert(Tag::Rotated);
        out.tags.remove(&Tag::Separable);
    }

    if let Some(s) = &chain.shift {
        if s.len() != spec.dimension {
            return Err(Error::InvalidTransform(format!(
                "shift vector has dimension {}, expected {}",
                s.len(),
                spec.dimension
            )));
        }
        out.shift = Some(s.clone());
        out.tags.insert(Tag::Shifted);
    }

    // New optimum: x* = s + Qᵀb (reduces to s when the base optimum is the
    // origin, and to s + b without rotation).
    let base_opt = spec.base.base_optimum(spec.dimension);
    let s = chain.shift.clone().unwrap_or_else(|| vec![0.0; spec.dimension]);
    let qtb = match &out.rotation {
        Some(q) => rotation::matvec_transpose(q, &base_opt),
        None => base_opt,
    };
    out.optimum_location = s.iter().zip(&qtb).map(|(si, bi)| si + bi).collect();

    for (i, (x, (lo, hi))) in out.optimum_location.iter().zip(&out.bounds).enumerate() {
        if !(lo < x && x < hi) {
            return Err(Error::InvalidTransform(format!(
                "transformed optimum coordinate {i} = {x} is not strictly inside [{lo}, {hi}]"
            )));
        }
    }

    if let Some(noise) = chain.noise {
        if !(noise.magnitude >= 0.0 && noise.magnitude.is_finite()) {
            return Err(Error::InvalidTransform(format!(
                "noise magnitude must be a finite nonnegative real, got {}",
                noise.magnitude
            )));
        }
        out.noise = Some(noise);
        if noise.magnitude > 0.0 {
            out.tags.insert(Tag::Noisy);
        }
    }

    Ok(out)
}

/// Which transforms [`build_suite`] attaches to every function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformPolicy {
    pub shift: bool,
    pub rotate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoisePolicy>,
}

/// Noise settings of a [`TransformPolicy`] (seeds are derived per function).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePolicy {
    pub model: NoiseModel,
    pub magnitude: f64,
}

impl Default for TransformPolicy {
    /// Shift-only: the least a fair suite should do.
    fn default() -> Self {
        TransformPolicy { shift: true, rotate: false, noise: None }
    }
}

/// A reproducible suite definition; [`SuiteDefinition::build`] materializes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteDefinition {
    pub functions: Vec<String>,
    pub dimension: usize,
    /// Omitted in a manifest → the shift-only default.
    #[serde(default)]
    pub policy: TransformPolicy,
    pub master_seed: u64,
}

impl SuiteDefinition {
    pub fn build(&self) -> Result<Vec<FunctionSpec>> {
        build_suite(&self.functions, self.dimension, &self.policy, self.master_seed)
    }
}

/// Materializes a suite: one spec per name, with independent per-function
/// transform seeds derived from `master_seed`, so adding or reordering
/// functions never changes another function's transforms.
pub fn build_suite(
    names: &[impl AsRef<str>],
    dimension: usize,
    policy: &TransformPolicy,
    master_seed: u64,
) -> Result<Vec<FunctionSpec>> {
    let mut seen = BTreeSet::new();
    let mut suite = Vec::with_capacity(names.len());
    for name in names {
        let name = name.as_ref();
        if !seen.insert(name.to_string()) {
            return Err(Error::InvalidInput(format!(
                "function {name} appears twice in the suite; ids must be unique"
            )));
        }
        let base = BaseFunction::parse(name)?;
        let spec = FunctionSpec::base(base, dimension)?;

        let rotation_matrix = policy.rotate.then(|| {
            let seed = derive_seed(master_seed, name, "rotation");
            random_orthogonal(dimension, seed)
        });

        // The post-transform optimum is drawn uniformly from the central 80%
        // of the box: away from the center bias and away from the bounds.
        let shift = if policy.shift {
            use rand::Rng;
            use rand::SeedableRng;
            let seed = derive_seed(master_seed, name, "shift");
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let target: Vec<f64> = spec
                .bounds
                .iter()
                .map(|(lo, hi)| {
                    let margin = 0.1 * (hi - lo);
                    rng.random_range(lo + margin..hi - margin)
                })
                .collect();
            // Chain semantics: optimum lands at s + Qᵀb, so aim s = target − Qᵀb.
            let base_opt = base.base_optimum(dimension);
            let qtb = match &rotation_matrix {
                Some(q) => rotation::matvec_transpose(q, &base_opt),
                None => base_opt,
            };
            Some(target.iter().zip(&qtb).map(|(t, b)| t - b).collect())
        } else {
            None
        };

        let noise = policy.noise.map(|np| NoiseSpec {
            model: np.model,
            magnitude: np.magnitude,
            seed: derive_seed(master_seed, name, "noise"),
        });

        let chain = TransformChain { shift, rotation: rotation_matrix, noise };
        suite.push(apply_chain(&spec, &chain)?);
    }
    Ok(suite)
}

fn derive_seed(master_seed: u64, function: &str, role: &str) -> u64 {
    stable_hash(&[
        &master_seed.to_le_bytes(),
        function.as_bytes(),
        role.as_bytes(),
    ])
}
