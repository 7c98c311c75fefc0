//! Surrogate-assisted controller: alternates `n̂` CMA-ES generations on a
//! ranking-SVM surrogate with one generation on the true objective, adapts
//! `n̂` from the surrogate's rank error and tunes the surrogate
//! hyper-parameters online.

mod hyperopt;

pub use hyperopt::{rank_candidates, HyperCandidate, HyperOptimizer};

use rayon::prelude::*;

use crate::cma::{CmaError, CmaState, TerminationReason};
use crate::numerics::Rng;
use crate::surrogate::{
    rank_error, HyperBox, Sample, SurrogateHyperParams, SurrogateModel, TrainingPool,
};
use crate::testbed::{BlackBox, TestbedError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaAcmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{remaining} evaluations left, a generation needs {needed}")]
    BudgetExhausted { remaining: u64, needed: u64 },
    #[error(transparent)]
    Testbed(#[from] TestbedError),
    #[error(transparent)]
    Cma(#[from] CmaError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaAcmConfig {
    /// True generations before the surrogate is used.
    pub g_start: u64,
    /// Upper bound on surrogate generations per cycle; 0 disables the
    /// surrogate entirely.
    pub nhat_max: usize,
    /// Candidate models per hyper-parameter step.
    pub lambda_hyp: usize,
    /// Rank error at which `n̂` drops to 0.
    pub tau_err: f64,
    /// Weight of the newest measurement in the running rank error that
    /// drives `n̂`; 1 uses the last measurement alone.
    pub err_smoothing: f64,
    /// When false, every model is trained with `fixed_hyper` (or the box
    /// defaults) and no candidates are generated.
    pub self_adapt: bool,
    pub fixed_hyper: Option<SurrogateHyperParams>,
    /// Replaces the box derived from dimension and population size.
    pub hyper_box: Option<HyperBox>,
}

impl Default for SaAcmConfig {
    fn default() -> Self {
        Self {
            g_start: 10,
            nhat_max: 20,
            lambda_hyp: 20,
            tau_err: 0.45,
            err_smoothing: 0.2,
            self_adapt: true,
            fixed_hyper: None,
            hyper_box: None,
        }
    }
}

impl SaAcmConfig {
    /// Configuration with the surrogate switched off.
    pub fn disabled() -> Self {
        Self {
            nhat_max: 0,
            ..Self::default()
        }
    }

    pub fn surrogate_enabled(&self) -> bool {
        self.nhat_max > 0
    }

    pub fn validate(&self) -> Result<(), SaAcmError> {
        let bad = |m: &str| Err(SaAcmError::InvalidConfig(m.into()));
        if self.g_start < 1 {
            return bad("g_start must be >= 1");
        }
        if self.lambda_hyp < 1 {
            return bad("lambda_hyp must be >= 1");
        }
        if !(self.tau_err > 0.0 && self.tau_err <= 1.0) {
            return bad("tau_err must lie in (0, 1]");
        }
        Ok(())
    }
}

/// `round(nhat_max · max(0, tau_err − err) / tau_err)`, clipped to
/// `[0, nhat_max]`.
pub fn adapt_nhat(err: f64, cfg: &SaAcmConfig) -> usize {
    let frac = (cfg.tau_err - err).max(0.0) / cfg.tau_err;
    ((cfg.nhat_max as f64 * frac).round() as usize).min(cfg.nhat_max)
}

/// What one cycle did.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub cycle: u64,
    pub surrogate_generations: usize,
    pub true_evaluations: u64,
    /// Error of the previous model on this cycle's true generation.
    pub rank_error: Option<f64>,
    /// `n̂` after adaptation.
    pub nhat: usize,
    pub hyper: Option<HyperOutcome>,
}

/// Result of one hyper-parameter step.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperOutcome {
    pub params: SurrogateHyperParams,
    /// Rank error of the winner on the validation points.
    pub validation_error: f64,
    pub candidates: usize,
}

#[derive(Clone, Debug)]
pub struct SaAcmState {
    cfg: SaAcmConfig,
    cma: CmaState,
    archive: Vec<Sample>,
    nhat: usize,
    last_error: Option<f64>,
    bounds: HyperBox,
    optimizer: HyperOptimizer,
    hyper: SurrogateHyperParams,
    model: Option<SurrogateModel>,
    cycle: u64,
    surrogate_generations: u64,
    true_evaluations: u64,
}

impl SaAcmState {
    pub fn new(cma: CmaState, cfg: SaAcmConfig) -> Result<Self, SaAcmError> {
        cfg.validate()?;
        let bounds = cfg
            .hyper_box
            .clone()
            .unwrap_or_else(|| HyperBox::for_problem(cma.dim(), cma.lambda()));
        let hyper = cfg.fixed_hyper.clone().unwrap_or_else(|| bounds.defaults());
        Ok(Self {
            optimizer: HyperOptimizer::new(),
            bounds,
            hyper,
            cfg,
            cma,
            archive: Vec::new(),
            nhat: 0,
            last_error: None,
            model: None,
            cycle: 0,
            surrogate_generations: 0,
            true_evaluations: 0,
        })
    }

    pub fn config(&self) -> &SaAcmConfig {
        &self.cfg
    }

    pub fn cma(&self) -> &CmaState {
        &self.cma
    }

    /// True evaluations in recency order, oldest first.
    pub fn archive(&self) -> &[Sample] {
        &self.archive
    }

    pub fn nhat(&self) -> usize {
        self.nhat
    }

    pub fn last_error(&self) -> Option<f64> {
        self.last_error
    }

    pub fn hyper_box(&self) -> &HyperBox {
        &self.bounds
    }

    pub fn hyper_optimizer(&self) -> &HyperOptimizer {
        &self.optimizer
    }

    pub fn hyper(&self) -> &SurrogateHyperParams {
        &self.hyper
    }

    pub fn model(&self) -> Option<&SurrogateModel> {
        self.model.as_ref()
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn surrogate_generations(&self) -> u64 {
        self.surrogate_generations
    }

    pub fn true_generations(&self) -> u64 {
        self.cma.true_generations()
    }

    pub fn true_evaluations(&self) -> u64 {
        self.true_evaluations
    }

    pub fn termination(&self) -> Option<TerminationReason> {
        self.cma.check_termination()
    }

    /// One control cycle: up to `n̂` surrogate generations, one true
    /// generation, error measurement, `n̂` adaptation, hyper-parameter step
    /// and retraining. Fails without side effects when fewer than λ
    /// evaluations remain.
    pub fn saacm_cycle<B: BlackBox>(
        &mut self,
        objective: &mut B,
        rng: &mut Rng,
    ) -> Result<CycleReport, SaAcmError> {
        let lambda = self.cma.lambda() as u64;
        if let Some(remaining) = objective.remaining() {
            if remaining < lambda {
                return Err(SaAcmError::BudgetExhausted {
                    remaining,
                    needed: lambda,
                });
            }
        }

        let mut surrogate_generations = 0;
        if self.cycle >= self.cfg.g_start && self.nhat > 0 {
            if let Some(model) = &self.model {
                for _ in 0..self.nhat {
                    let mut pop = self.cma.ask(rng);
                    pop.set_fitness(model.predict_many(&pop.points));
                    self.cma.tell_surrogate(&pop)?;
                    surrogate_generations += 1;
                }
            }
        }
        self.surrogate_generations += surrogate_generations as u64;

        let mut pop = self.cma.ask(rng);
        let mut fitness = Vec::with_capacity(pop.len());
        for x in &pop.points {
            fitness.push(objective.evaluate(x)?);
        }
        self.true_evaluations += lambda;
        pop.set_fitness(fitness.clone());
        self.cma.tell(&pop)?;
        self.archive.extend(
            pop.points
                .iter()
                .zip(&fitness)
                .map(|(x, &f)| Sample::new(x.clone(), f)),
        );

        let mut report = CycleReport {
            cycle: self.cycle,
            surrogate_generations,
            true_evaluations: lambda,
            rank_error: None,
            nhat: self.nhat,
            hyper: None,
        };
        if self.cfg.surrogate_enabled() {
            if let Some(model) = &self.model {
                let err = rank_error(model, &pop.points, &fitness);
                let beta = self.cfg.err_smoothing;
                let smoothed = self
                    .last_error
                    .map_or(err, |e| (1.0 - beta) * e + beta * err);
                self.last_error = Some(smoothed);
                self.nhat = adapt_nhat(smoothed, &self.cfg);
                report.rank_error = Some(err);
                report.nhat = self.nhat;
            }
            report.hyper = self.hyper_step(rng);
            self.retrain();
        }
        self.cycle += 1;
        Ok(report)
    }

    /// Training pool of the most recent points: as many as the largest
    /// training set plus one validation generation.
    fn pool(&self) -> Option<TrainingPool> {
        let keep = self.bounds.n_train.1 + self.cma.lambda();
        let start = self.archive.len().saturating_sub(keep);
        TrainingPool::new(&self.archive[start..], self.cma.eigen()).ok()
    }

    /// Samples `lambda_hyp` hyper-parameter candidates, trains each on the
    /// archive without the last λ points, scores it by rank error on those
    /// points (ties go to the earlier candidate) and updates the search
    /// distribution. Returns `None` and keeps the current hyper-parameters
    /// while the archive is too small.
    pub fn hyper_step(&mut self, rng: &mut Rng) -> Option<HyperOutcome> {
        let lambda = self.cma.lambda();
        if self.archive.len() < lambda + self.bounds.n_train.0 {
            return None;
        }
        let pool = self.pool()?;
        let end = pool.len() - lambda;
        let validation = &pool.samples()[end..];
        let vx: Vec<Vec<f64>> = validation.iter().map(|s| s.x.clone()).collect();
        let vf: Vec<f64> = validation.iter().map(|s| s.f).collect();
        let score = |hp: &SurrogateHyperParams| match pool.train_window(hp, end) {
            Ok(model) => rank_error(&model, &vx, &vf),
            Err(_) => 1.0,
        };

        if !self.cfg.self_adapt {
            return Some(HyperOutcome {
                validation_error: score(&self.hyper),
                params: self.hyper.clone(),
                candidates: 0,
            });
        }
        let candidates = self
            .optimizer
            .sample(&self.bounds, self.cfg.lambda_hyp, rng);
        let errors: Vec<f64> = candidates.par_iter().map(|c| score(&c.params)).collect();
        let best = rank_candidates(&errors)[0];
        let best_err = errors[best];
        self.optimizer.update(&candidates, &errors);
        self.hyper = candidates[best].params.clone();
        Some(HyperOutcome {
            params: self.hyper.clone(),
            validation_error: best_err,
            candidates: candidates.len(),
        })
    }

    /// Refits the model on the most recent points with the current
    /// hyper-parameters and covariance.
    fn retrain(&mut self) {
        if self.archive.len() < 2 {
            return;
        }
        let Some(pool) = self.pool() else { return };
        match pool.train_window(&self.hyper, pool.len()) {
            Ok(model) => self.model = Some(model),
            Err(e) => log::debug!("surrogate not retrained: {e}"),
        }
    }
}
