//! Noiseless benchmark functions f1–f24 with seeded instances and
//! instrumented evaluation.
//!
//! Instances are generated from the library's own RNG and are functionally
//! equivalent to, not bit-identical with, the classic instance streams.

mod functions;
mod transforms;

pub use functions::{FunctionGroup, FUNCTION_NAMES};
pub use transforms::{f_pen, lambda_alpha, t_asy, t_osz, t_osz_scalar};

use functions::InstanceData;

use crate::numerics::hash_seed;

/// Precision at which a trial counts as solved.
pub const FINAL_TARGET: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TestbedError {
    #[error("unknown function id {0} (expected 1..=24)")]
    UnknownFunction(usize),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("input has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("input contains a non-finite coordinate")]
    InvalidInput,
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(u64),
}

/// Strictly decreasing list of Δf targets.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSet {
    targets: Vec<f64>,
}

impl TargetSet {
    /// Sorts descending and drops duplicates; rejects non-positive values.
    pub fn new(mut targets: Vec<f64>) -> Option<Self> {
        if targets.is_empty() || targets.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return None;
        }
        targets.sort_by(|a, b| b.total_cmp(a));
        targets.dedup();
        Some(Self { targets })
    }

    /// `count` log-uniform targets from `10^hi` down to `10^lo`, both ends
    /// included; integral exponents give exact powers of ten.
    pub fn log_uniform(hi_exp: f64, lo_exp: f64, count: usize) -> Self {
        assert!(count >= 2 && hi_exp > lo_exp);
        let steps = (count - 1) as f64;
        let targets = (0..count)
            .map(|k| {
                let e = (hi_exp * steps - (hi_exp - lo_exp) * k as f64) / steps;
                if e.fract() == 0.0 {
                    10f64.powi(e as i32)
                } else {
                    10f64.powf(e)
                }
            })
            .collect();
        Self::new(targets).expect("positive targets")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Index of the target equal to `t` up to a relative tolerance of 1e-6.
    pub fn position(&self, t: f64) -> Option<usize> {
        self.targets
            .iter()
            .position(|x| (x - t).abs() <= 1e-6 * t.abs())
    }
}

impl Default for TargetSet {
    /// `10^2, 10^1.8, …, 10^-7.8` and the final precision `1e-8`: 51
    /// targets, every decade included.
    fn default() -> Self {
        Self::log_uniform(2.0, -8.0, 51)
    }
}

/// Instrumented objective as seen by the optimizers.
pub trait BlackBox {
    fn dim(&self) -> usize;
    /// Counted evaluation; fails once the budget is spent.
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError>;
    fn evaluations(&self) -> u64;
    /// Evaluations left, `None` when unlimited.
    fn remaining(&self) -> Option<u64>;
    /// Whether the run can stop because the final target was reached.
    fn solved(&self) -> bool;
}

/// One instrumented instance of a benchmark function. Single owner.
#[derive(Clone, Debug)]
pub struct Objective {
    instance: u64,
    data: InstanceData,
    evals: u64,
    best: f64,
    budget: Option<u64>,
    targets: TargetSet,
    hits: Vec<Option<u64>>,
}

/// Builds instance `instance` of function `fid` in dimension `dim`.
pub fn make_objective(fid: usize, instance: u64, dim: usize) -> Result<Objective, TestbedError> {
    Objective::new(fid, instance, dim)
}

impl Objective {
    pub fn new(fid: usize, instance: u64, dim: usize) -> Result<Self, TestbedError> {
        if !(1..=24).contains(&fid) {
            return Err(TestbedError::UnknownFunction(fid));
        }
        if dim < 2 {
            return Err(TestbedError::InvalidDimension(dim));
        }
        let seed = hash_seed(&[fid as u64, instance, dim as u64]);
        let data = InstanceData::generate(fid, instance, dim, seed);
        let targets = TargetSet::default();
        Ok(Self {
            instance,
            hits: vec![None; targets.len()],
            data,
            evals: 0,
            best: f64::INFINITY,
            budget: None,
            targets,
        })
    }

    /// Replaces the target set and clears the hit log.
    pub fn with_targets(mut self, targets: TargetSet) -> Self {
        self.hits = vec![None; targets.len()];
        self.targets = targets;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn fid(&self) -> usize {
        self.data.fid
    }

    pub fn instance(&self) -> u64 {
        self.instance
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn name(&self) -> &'static str {
        FUNCTION_NAMES[self.data.fid - 1]
    }

    pub fn group(&self) -> FunctionGroup {
        FunctionGroup::of(self.data.fid).expect("validated id")
    }

    pub fn x_opt(&self) -> &[f64] {
        &self.data.x_opt
    }

    pub fn f_opt(&self) -> f64 {
        self.data.f_opt
    }

    pub fn evaluations(&self) -> u64 {
        self.evals
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Evaluations left before the budget is exhausted.
    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.evals))
    }

    /// Best value returned so far, `+∞` before the first evaluation.
    pub fn best(&self) -> f64 {
        self.best
    }

    /// `best − f_opt`.
    pub fn best_delta(&self) -> f64 {
        self.best - self.data.f_opt
    }

    pub fn targets(&self) -> &TargetSet {
        &self.targets
    }

    /// Evaluation count at the first hit of each target, aligned with
    /// [`targets`](Self::targets).
    pub fn hits(&self) -> &[Option<u64>] {
        &self.hits
    }

    pub fn final_target_hit(&self) -> bool {
        self.best_delta() <= FINAL_TARGET
    }

    /// Function value without touching counters or logs.
    pub fn value(&self, x: &[f64]) -> Result<f64, TestbedError> {
        self.check(x)?;
        Ok(self.data.value(x))
    }

    fn check(&self, x: &[f64]) -> Result<(), TestbedError> {
        if x.len() != self.data.dim {
            return Err(TestbedError::DimensionMismatch {
                got: x.len(),
                expected: self.data.dim,
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(TestbedError::InvalidInput);
        }
        Ok(())
    }

    /// Evaluates `x`, counts the call and logs newly reached targets.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError> {
        self.check(x)?;
        if let Some(b) = self.budget {
            if self.evals >= b {
                return Err(TestbedError::BudgetExhausted(b));
            }
        }
        let f = self.data.value(x);
        self.evals += 1;
        if f < self.best {
            self.best = f;
            let delta = f - self.data.f_opt;
            for (t, hit) in self.targets.as_slice().iter().zip(self.hits.iter_mut()) {
                if hit.is_none() && delta <= *t {
                    *hit = Some(self.evals);
                }
            }
        }
        Ok(f)
    }

    /// One CSV line `id,name,group,D,instance,f_opt` (no trailing newline).
    pub fn metadata_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.fid(),
            self.name(),
            self.group().name(),
            self.dim(),
            self.instance,
            crate::harness::sci(self.f_opt())
        )
    }
}

pub const METADATA_HEADER: &str = "id,name,group,D,instance,f_opt";

/// Metadata table for every (fid, D, instance) combination, header included.
pub fn metadata_csv(
    fids: &[usize],
    dims: &[usize],
    instances: &[u64],
) -> Result<String, TestbedError> {
    let mut out = String::from(METADATA_HEADER);
    out.push('\n');
    for &fid in fids {
        for &d in dims {
            for &i in instances {
                out.push_str(&make_objective(fid, i, d)?.metadata_row());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

impl BlackBox for Objective {
    fn dim(&self) -> usize {
        Objective::dim(self)
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError> {
        Objective::evaluate(self, x)
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }

    fn remaining(&self) -> Option<u64> {
        Objective::remaining(self)
    }

    fn solved(&self) -> bool {
        self.final_target_hit()
    }
}

/// Applies `g` to every value returned by the wrapped black box.
pub struct Transformed<B, G> {
    pub inner: B,
    g: G,
}

impl<B: BlackBox, G: Fn(f64) -> f64> Transformed<B, G> {
    pub fn new(inner: B, g: G) -> Self {
        Self { inner, g }
    }
}

impl<B: BlackBox, G: Fn(f64) -> f64> BlackBox for Transformed<B, G> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError> {
        self.inner.evaluate(x).map(&self.g)
    }

    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }

    fn remaining(&self) -> Option<u64> {
        self.inner.remaining()
    }

    fn solved(&self) -> bool {
        self.inner.solved()
    }
}
