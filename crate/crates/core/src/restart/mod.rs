//! IPOP and BIPOP restart schedules around an inner optimizer, and the four
//! benchmarked algorithm combinations.

mod tracked;

use std::fmt;
use std::str::FromStr;

use crate::cma::{CmaParams, CmaState, TerminationReason};
use crate::numerics::Rng;
use crate::saacm::{SaAcmConfig, SaAcmError, SaAcmState};
use crate::testbed::BlackBox;

use tracked::Tracked;

/// Initial mean box and step-size for every (re)start.
pub const INIT_LOWER: f64 = -4.0;
pub const INIT_UPPER: f64 = 4.0;
pub const DEFAULT_SIGMA0: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RestartError {
    #[error("could not build the inner optimizer: {0}")]
    Setup(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
}

/// An optimizer advanced one step at a time on a black box.
pub trait InnerOptimizer {
    /// One unit of work consuming exactly `lambda()` true evaluations.
    fn step<B: BlackBox>(&mut self, objective: &mut B, rng: &mut Rng) -> Result<(), SaAcmError>;
    fn termination(&self) -> Option<TerminationReason>;
    fn lambda(&self) -> usize;
    fn true_generations(&self) -> u64;
}

/// CMA-ES without surrogate: one true generation per step.
#[derive(Clone, Debug)]
pub struct PlainCma {
    pub state: CmaState,
}

impl InnerOptimizer for PlainCma {
    fn step<B: BlackBox>(&mut self, objective: &mut B, rng: &mut Rng) -> Result<(), SaAcmError> {
        let lambda = self.state.lambda() as u64;
        if let Some(remaining) = objective.remaining() {
            if remaining < lambda {
                return Err(SaAcmError::BudgetExhausted {
                    remaining,
                    needed: lambda,
                });
            }
        }
        let mut pop = self.state.ask(rng);
        let mut f = Vec::with_capacity(pop.len());
        for x in &pop.points {
            f.push(objective.evaluate(x)?);
        }
        pop.set_fitness(f);
        self.state.tell(&pop)?;
        Ok(())
    }

    fn termination(&self) -> Option<TerminationReason> {
        self.state.check_termination()
    }

    fn lambda(&self) -> usize {
        self.state.lambda()
    }

    fn true_generations(&self) -> u64 {
        self.state.true_generations()
    }
}

impl InnerOptimizer for SaAcmState {
    fn step<B: BlackBox>(&mut self, objective: &mut B, rng: &mut Rng) -> Result<(), SaAcmError> {
        self.saacm_cycle(objective, rng).map(|_| ())
    }

    fn termination(&self) -> Option<TerminationReason> {
        SaAcmState::termination(self)
    }

    fn lambda(&self) -> usize {
        self.cma().lambda()
    }

    fn true_generations(&self) -> u64 {
        SaAcmState::true_generations(self)
    }
}

/// Starting conditions of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub x0: Vec<f64>,
    pub sigma0: f64,
    pub lambda: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartKind {
    Ipop,
    Bipop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartPolicy {
    pub kind: RestartKind,
    /// Population size of the first run; `None` uses the CMA-ES default.
    pub base_lambda: Option<usize>,
    /// `None` restarts until the budget is spent or the target is hit.
    pub max_restarts: Option<usize>,
    pub sigma0: f64,
    pub init_box: (f64, f64),
}

impl RestartPolicy {
    pub fn new(kind: RestartKind) -> Self {
        Self {
            kind,
            base_lambda: None,
            max_restarts: None,
            sigma0: DEFAULT_SIGMA0,
            init_box: (INIT_LOWER, INIT_UPPER),
        }
    }

    fn base_lambda(&self, dim: usize) -> usize {
        self.base_lambda
            .unwrap_or_else(|| CmaParams::default_lambda(dim))
    }
}

/// BIPOP regime a run is charged to. The first run belongs to neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    First,
    Large,
    Small,
}

/// Why a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum RunEnd {
    Terminated(TerminationReason),
    TargetReached,
    /// Overall budget (or the run's own cap) left less than one generation.
    BudgetExhausted,
    Failed(String),
}

impl fmt::Display for RunEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Terminated(r) => write!(f, "{r}"),
            Self::TargetReached => f.write_str("target"),
            Self::BudgetExhausted => f.write_str("budget"),
            Self::Failed(e) => write!(f, "failed: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub regime: Regime,
    pub lambda: usize,
    pub sigma0: f64,
    pub evaluations: u64,
    pub true_generations: u64,
    pub end: RunEnd,
    /// Best true value of this run, `+∞` if nothing was evaluated.
    pub best_f: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RestartLedger {
    pub runs: Vec<RunRecord>,
    pub large_budget: u64,
    pub small_budget: u64,
}

impl RestartLedger {
    pub fn total_evaluations(&self) -> u64 {
        self.runs.iter().map(|r| r.evaluations).sum()
    }

    pub fn lambdas(&self) -> Vec<usize> {
        self.runs.iter().map(|r| r.lambda).collect()
    }

    fn push(&mut self, record: RunRecord) {
        match record.regime {
            Regime::Large => self.large_budget += record.evaluations,
            Regime::Small => self.small_budget += record.evaluations,
            Regime::First => {}
        }
        self.runs.push(record);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub best_x: Option<Vec<f64>>,
    pub best_f: f64,
    pub ledger: RestartLedger,
}

fn initial_mean(dim: usize, policy: &RestartPolicy, rng: &mut Rng) -> Vec<f64> {
    let (lo, hi) = policy.init_box;
    (0..dim).map(|_| rng.uniform_in(lo, hi)).collect()
}

struct Best {
    x: Option<Vec<f64>>,
    f: f64,
}

/// Runs one inner optimizer until it terminates, the target is reached or
/// fewer than λ evaluations remain under `cap`.
fn drive<I, B>(
    inner: &mut I,
    objective: &mut B,
    cap: u64,
    spec: &RunSpec,
    regime: Regime,
    best: &mut Best,
    rng: &mut Rng,
) -> RunRecord
where
    I: InnerOptimizer,
    B: BlackBox,
{
    let mut tracked = Tracked::new(objective, cap);
    let end = loop {
        if tracked.solved() {
            break RunEnd::TargetReached;
        }
        match inner.step(&mut tracked, rng) {
            Ok(()) => {}
            Err(SaAcmError::BudgetExhausted { .. }) => break RunEnd::BudgetExhausted,
            Err(e) => break RunEnd::Failed(e.to_string()),
        }
        if tracked.solved() {
            break RunEnd::TargetReached;
        }
        if let Some(reason) = inner.termination() {
            break RunEnd::Terminated(reason);
        }
    };
    if tracked.best_f() < best.f {
        best.f = tracked.best_f();
        best.x = tracked.best_x().map(<[f64]>::to_vec);
    }
    RunRecord {
        regime,
        lambda: spec.lambda,
        sigma0: spec.sigma0,
        evaluations: tracked.used(),
        true_generations: inner.true_generations(),
        end,
        best_f: tracked.best_f(),
    }
}

fn done<B: BlackBox>(objective: &B, spent: u64, budget: u64, lambda: usize) -> bool {
    let left = budget.saturating_sub(spent);
    let left = objective.remaining().map_or(left, |r| r.min(left));
    objective.solved() || left < lambda as u64
}

/// IPOP: restart with a doubled population size until `budget`
/// evaluations are spent or the target is reached.
pub fn run_ipop<I, B, F, E>(
    mut make_inner: F,
    objective: &mut B,
    budget: u64,
    policy: &RestartPolicy,
    rng: &mut Rng,
) -> Result<RestartOutcome, RestartError>
where
    I: InnerOptimizer,
    B: BlackBox,
    F: FnMut(&RunSpec) -> Result<I, E>,
    E: fmt::Display,
{
    let dim = objective.dim();
    let mut ledger = RestartLedger::default();
    let mut best = Best {
        x: None,
        f: f64::INFINITY,
    };
    let mut lambda = policy.base_lambda(dim);
    let mut spent = 0;
    while !done(objective, spent, budget, lambda)
        && policy.max_restarts.is_none_or(|m| ledger.runs.len() <= m)
    {
        let spec = RunSpec {
            x0: initial_mean(dim, policy, rng),
            sigma0: policy.sigma0,
            lambda,
        };
        let mut inner = make_inner(&spec).map_err(|e| RestartError::Setup(e.to_string()))?;
        let regime = if ledger.runs.is_empty() {
            Regime::First
        } else {
            Regime::Large
        };
        let record = drive(
            &mut inner,
            objective,
            budget - spent,
            &spec,
            regime,
            &mut best,
            rng,
        );
        spent += record.evaluations;
        ledger.push(record);
        lambda *= 2;
    }
    Ok(RestartOutcome {
        best_x: best.x,
        best_f: best.f,
        ledger,
    })
}

/// BIPOP: after a first default run, alternates between a large regime
/// (doubling population, default step-size) and a small regime (random
/// population between the default and the last large one, reduced random
/// step-size, at most half the evaluations of the last large run), always
/// choosing the regime that has consumed fewer evaluations. Ties go to the
/// large regime.
pub fn run_bipop<I, B, F, E>(
    mut make_inner: F,
    objective: &mut B,
    budget: u64,
    policy: &RestartPolicy,
    rng: &mut Rng,
) -> Result<RestartOutcome, RestartError>
where
    I: InnerOptimizer,
    B: BlackBox,
    F: FnMut(&RunSpec) -> Result<I, E>,
    E: fmt::Display,
{
    let dim = objective.dim();
    let base = policy.base_lambda(dim);
    let mut ledger = RestartLedger::default();
    let mut best = Best {
        x: None,
        f: f64::INFINITY,
    };
    let mut spent = 0;
    let mut large_runs = 0u32;
    let mut last_large_evals = 0u64;
    loop {
        if policy.max_restarts.is_some_and(|m| ledger.runs.len() > m) {
            break;
        }
        let x0 = initial_mean(dim, policy, rng);
        let (regime, lambda, sigma0, cap) = if ledger.runs.is_empty() {
            (Regime::First, base, policy.sigma0, u64::MAX)
        } else if ledger.large_budget <= ledger.small_budget {
            (
                Regime::Large,
                base << (large_runs + 1),
                policy.sigma0,
                u64::MAX,
            )
        } else {
            let u = rng.uniform();
            let u2 = rng.uniform();
            let large = (base << large_runs) as f64;
            let lambda = small_lambda(base, large, u);
            let sigma0 = policy.sigma0 * 10f64.powf(-2.0 * u2);
            (Regime::Small, lambda, sigma0, last_large_evals / 2)
        };
        if done(objective, spent, budget, lambda) {
            break;
        }
        let spec = RunSpec { x0, sigma0, lambda };
        let mut inner = make_inner(&spec).map_err(|e| RestartError::Setup(e.to_string()))?;
        let cap = cap.min(budget - spent);
        let record = drive(&mut inner, objective, cap, &spec, regime, &mut best, rng);
        spent += record.evaluations;
        if regime == Regime::Large {
            large_runs += 1;
            last_large_evals = record.evaluations;
        }
        let stalled = record.evaluations == 0;
        ledger.push(record);
        if stalled && regime == Regime::Small {
            // The cap admits no generation of this population size; only
            // large runs can make progress from here.
            last_large_evals = last_large_evals.max(2 * lambda as u64);
        }
    }
    Ok(RestartOutcome {
        best_x: best.x,
        best_f: best.f,
        ledger,
    })
}

/// `⌊base · (large / base)^{u²}⌋`, at least 2.
pub fn small_lambda(base: usize, large: f64, u: f64) -> usize {
    let b = base as f64;
    ((b * (large / b).powf(u * u)).floor() as usize).max(2)
}

/// The four benchmarked restart/optimizer combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    IpopACma,
    BipopCma,
    IpopSaAcm,
    BipopSaAcm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::IpopACma,
        Algorithm::BipopCma,
        Algorithm::IpopSaAcm,
        Algorithm::BipopSaAcm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::IpopACma => "ipop-acma",
            Self::BipopCma => "bipop-cma",
            Self::IpopSaAcm => "ipop-saacm",
            Self::BipopSaAcm => "bipop-saacm",
        }
    }

    pub fn restart_kind(&self) -> RestartKind {
        match self {
            Self::IpopACma | Self::IpopSaAcm => RestartKind::Ipop,
            Self::BipopCma | Self::BipopSaAcm => RestartKind::Bipop,
        }
    }

    /// Default covariance update: passive only for the plain BIPOP variant.
    pub fn active(&self) -> bool {
        !matches!(self, Self::BipopCma)
    }

    pub fn uses_surrogate(&self) -> bool {
        matches!(self, Self::IpopSaAcm | Self::BipopSaAcm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = RestartError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| RestartError::UnknownAlgorithm(s.to_string()))
    }
}

/// Algorithm settings beyond the restart scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSettings {
    pub algorithm: Algorithm,
    /// Overrides [`Algorithm::active`].
    pub active: Option<bool>,
    /// Surrogate settings; ignored by the plain variants.
    pub saacm: SaAcmConfig,
    pub policy: RestartPolicy,
}

impl AlgorithmSettings {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            active: None,
            saacm: SaAcmConfig::default(),
            policy: RestartPolicy::new(algorithm.restart_kind()),
        }
    }

    pub fn is_active(&self) -> bool {
        self.active.unwrap_or(self.algorithm.active())
    }
}

/// Runs `settings.algorithm` on `objective` with `budget` evaluations.
pub fn run_algorithm<B: BlackBox>(
    settings: &AlgorithmSettings,
    objective: &mut B,
    budget: u64,
    rng: &mut Rng,
) -> Result<RestartOutcome, RestartError> {
    let dim = objective.dim();
    let active = settings.is_active();
    let cma = move |spec: &RunSpec| {
        CmaParams::new(dim, Some(spec.lambda), active)
            .and_then(|p| CmaState::new(&spec.x0, spec.sigma0, p))
    };
    let policy = &settings.policy;
    if settings.algorithm.uses_surrogate() {
        let cfg = settings.saacm.clone();
        let make = |spec: &RunSpec| -> Result<SaAcmState, SaAcmError> {
            SaAcmState::new(cma(spec)?, cfg.clone())
        };
        match policy.kind {
            RestartKind::Ipop => run_ipop(make, objective, budget, policy, rng),
            RestartKind::Bipop => run_bipop(make, objective, budget, policy, rng),
        }
    } else {
        let make = |spec: &RunSpec| cma(spec).map(|state| PlainCma { state });
        match policy.kind {
            RestartKind::Ipop => run_ipop(make, objective, budget, policy, rng),
            RestartKind::Bipop => run_bipop(make, objective, budget, policy, rng),
        }
    }
}
