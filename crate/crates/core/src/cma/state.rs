use std::collections::VecDeque;

use super::{CmaError, CmaParams};
use crate::numerics::{norm, sym_eigen, EigenDecomposition, Rng, SymMatrix};

/// Why a run stopped. Checked in declaration order; the first match wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    TargetHit,
    MaxGenerations,
    ConditionCov,
    TolX,
    TolFun,
    FlatFitness,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TargetHit => "target",
            Self::MaxGenerations => "maxgen",
            Self::ConditionCov => "condition",
            Self::TolX => "tolx",
            Self::TolFun => "tolfun",
            Self::FlatFitness => "flat",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminationConfig {
    pub tol_fun: f64,
    /// Multiplied by the initial step-size.
    pub tol_x: f64,
    pub max_condition: f64,
    /// Counted in true-fitness generations.
    pub max_generations: Option<u64>,
    /// Absolute objective value at or below which the run counts as solved.
    pub target: Option<f64>,
}

impl Default for TerminationConfig {
    fn default() -> Self {
        Self {
            tol_fun: 1e-12,
            tol_x: 1e-12,
            max_condition: 1e14,
            max_generations: None,
            target: None,
        }
    }
}

/// λ sampled points of one generation. `points[i] = m + σ·B·diag(√d)·z[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    generation: u64,
    pub points: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub fitness: Option<Vec<f64>>,
}

impl Population {
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn set_fitness(&mut self, fitness: Vec<f64>) {
        assert_eq!(
            fitness.len(),
            self.points.len(),
            "one fitness value per point"
        );
        self.fitness = Some(fitness);
    }

    /// Indices sorted best-first; ties keep sampling order.
    pub fn ranking(&self) -> Option<Vec<usize>> {
        self.fitness.as_ref().map(|f| rank_order(f))
    }
}

/// Stable ascending argsort.
pub(crate) fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmaState {
    params: CmaParams,
    mean: Vec<f64>,
    sigma: f64,
    sigma0: f64,
    cov: SymMatrix,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    eigen: EigenDecomposition,
    generation: u64,
    true_generations: u64,
    best_history: VecDeque<f64>,
    last_best: Option<f64>,
    last_median: Option<f64>,
    termination: TerminationConfig,
}

impl CmaState {
    pub fn new(x0: &[f64], sigma0: f64, params: CmaParams) -> Result<Self, CmaError> {
        let d = params.dim;
        if x0.len() != d {
            return Err(CmaError::InvalidParam(format!(
                "x0 has length {}, expected {d}",
                x0.len()
            )));
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(CmaError::InvalidParam(format!(
                "sigma0 must be positive, got {sigma0}"
            )));
        }
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(CmaError::InvalidParam("x0 must be finite".into()));
        }
        params.validate()?;
        let cov = SymMatrix::identity(d);
        let eigen = sym_eigen(&cov)?;
        Ok(Self {
            params,
            mean: x0.to_vec(),
            sigma: sigma0,
            sigma0,
            cov,
            p_sigma: vec![0.0; d],
            p_c: vec![0.0; d],
            eigen,
            generation: 0,
            true_generations: 0,
            best_history: VecDeque::new(),
            last_best: None,
            last_median: None,
            termination: TerminationConfig::default(),
        })
    }

    pub fn with_termination(mut self, termination: TerminationConfig) -> Self {
        self.termination = termination;
        self
    }

    pub fn params(&self) -> &CmaParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn cov(&self) -> &SymMatrix {
        &self.cov
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eigen
    }

    pub fn p_sigma(&self) -> &[f64] {
        &self.p_sigma
    }

    pub fn p_c(&self) -> &[f64] {
        &self.p_c
    }

    /// Generations told so far, surrogate ones included.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Generations told with true fitness.
    pub fn true_generations(&self) -> u64 {
        self.true_generations
    }

    pub fn termination(&self) -> &TerminationConfig {
        &self.termination
    }

    /// Length of the best-fitness window used by TolFun.
    pub fn history_window(&self) -> usize {
        10 + (30.0 * self.dim() as f64 / self.lambda() as f64).ceil() as usize
    }

    /// Samples λ points from `N(m, σ²C)`.
    pub fn ask(&self, rng: &mut Rng) -> Population {
        let mut points = Vec::with_capacity(self.lambda());
        let mut zs = Vec::with_capacity(self.lambda());
        for _ in 0..self.lambda() {
            let z = rng.gaussian_vector(self.dim());
            let y = self.eigen.transform(&z);
            points.push(
                self.mean
                    .iter()
                    .zip(&y)
                    .map(|(m, yi)| m + self.sigma * yi)
                    .collect(),
            );
            zs.push(z);
        }
        Population {
            generation: self.generation,
            points,
            z: zs,
            fitness: None,
        }
    }

    /// Updates the distribution from a ranked population of true fitness
    /// values and records them in the stagnation history.
    pub fn tell(&mut self, pop: &Population) -> Result<(), CmaError> {
        self.update(pop, true)
    }

    /// Same update as [`tell`](Self::tell) for surrogate-valued populations;
    /// the stagnation history is left alone.
    pub fn tell_surrogate(&mut self, pop: &Population) -> Result<(), CmaError> {
        self.update(pop, false)
    }

    fn update(&mut self, pop: &Population, record: bool) -> Result<(), CmaError> {
        if pop.generation != self.generation {
            return Err(CmaError::StalePopulation {
                sampled: pop.generation,
                current: self.generation,
            });
        }
        let fitness = pop.fitness.as_ref().ok_or(CmaError::MissingFitness)?;
        if let Some(i) = fitness.iter().position(|f| !f.is_finite()) {
            return Err(CmaError::InvalidFitness(i));
        }
        let order = rank_order(fitness);
        let p = &self.params;
        let n = self.dim();
        let nf = n as f64;

        let ys: Vec<Vec<f64>> = order
            .iter()
            .map(|&i| {
                pop.points[i]
                    .iter()
                    .zip(&self.mean)
                    .map(|(x, m)| (x - m) / self.sigma)
                    .collect()
            })
            .collect();
        let mut y_w = vec![0.0; n];
        let mut z_w = vec![0.0; n];
        for (k, w) in p.weights.iter().enumerate() {
            for (acc, v) in y_w.iter_mut().zip(&ys[k]) {
                *acc += w * v;
            }
            for (acc, v) in z_w.iter_mut().zip(&pop.z[order[k]]) {
                *acc += w * v;
            }
        }

        for (m, y) in self.mean.iter_mut().zip(&y_w) {
            *m += self.sigma * y;
        }

        // C^{-1/2}·y_w = B·z_w for points sampled from the current eigen basis.
        let inv_sqrt_yw = self.eigen.b.mul_vec(&z_w);
        let cs = p.c_sigma;
        let ps_coef = (cs * (2.0 - cs) * p.mu_eff).sqrt();
        for (ps, v) in self.p_sigma.iter_mut().zip(&inv_sqrt_yw) {
            *ps = (1.0 - cs) * *ps + ps_coef * v;
        }
        let chi_n = expected_norm(n);
        let ps_norm = norm(&self.p_sigma);
        let bias = (1.0 - (1.0 - cs).powi(2 * (self.generation as i32 + 1))).sqrt();
        let h_sigma = bias > 0.0 && ps_norm / bias < (1.4 + 2.0 / (nf + 1.0)) * chi_n;

        let cc = p.c_c;
        let pc_coef = if h_sigma {
            (cc * (2.0 - cc) * p.mu_eff).sqrt()
        } else {
            0.0
        };
        for (pc, y) in self.p_c.iter_mut().zip(&y_w) {
            *pc = (1.0 - cc) * *pc + pc_coef * y;
        }

        let delta_h = if h_sigma { 0.0 } else { cc * (2.0 - cc) };
        let scale = 1.0 + p.c1 * delta_h - p.c1 - p.c_mu * p.weight_sum();
        let mut terms: Vec<(f64, &[f64])> = Vec::with_capacity(p.lambda + 1);
        if p.c1 != 0.0 {
            terms.push((p.c1, &self.p_c));
        }
        for (k, w) in p.weights.iter().enumerate() {
            if *w != 0.0 && p.c_mu != 0.0 {
                terms.push((p.c_mu * w, &ys[k]));
            }
        }
        for (j, w) in p.neg_weights.iter().enumerate() {
            if *w == 0.0 || p.c_mu == 0.0 {
                continue;
            }
            let k = p.mu + j;
            // ‖C^{-1/2} y‖ = ‖z‖ for the sampled points.
            let zn2 = pop.z[order[k]].iter().map(|v| v * v).sum::<f64>();
            let w_circ = w * nf / zn2.max(f64::MIN_POSITIVE);
            terms.push((p.c_mu * w_circ, &ys[k]));
        }
        self.cov.scale_add_outer(scale, &terms);

        self.sigma *= ((cs / p.d_sigma) * (ps_norm / chi_n - 1.0)).exp();

        self.refresh_eigen()?;
        self.generation += 1;

        if record {
            self.true_generations += 1;
            let best = fitness[order[0]];
            let median = fitness[order[order.len() / 2]];
            self.last_best = Some(best);
            self.last_median = Some(median);
            self.best_history.push_back(best);
            while self.best_history.len() > self.history_window() {
                self.best_history.pop_front();
            }
        }
        Ok(())
    }

    /// Recomputes the eigen cache; clamped eigenvalues are written back to C.
    fn refresh_eigen(&mut self) -> Result<(), CmaError> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(CmaError::InvalidParam(format!(
                "step-size became {}",
                self.sigma
            )));
        }
        let eigen = sym_eigen(&self.cov)?;
        if eigen.clamped > 0 {
            self.cov = eigen.reconstruct();
        }
        self.eigen = eigen;
        Ok(())
    }

    /// Best and median true fitness of the last true generation.
    pub fn last_generation_stats(&self) -> Option<(f64, f64)> {
        Some((self.last_best?, self.last_median?))
    }

    pub fn check_termination(&self) -> Option<TerminationReason> {
        let t = &self.termination;
        let best = self.last_best?;
        if t.target.is_some_and(|target| best <= target) {
            return Some(TerminationReason::TargetHit);
        }
        if t.max_generations
            .is_some_and(|g| self.true_generations >= g)
        {
            return Some(TerminationReason::MaxGenerations);
        }
        if self.eigen.clamped > 0 || self.eigen.condition() > t.max_condition {
            return Some(TerminationReason::ConditionCov);
        }
        let tol_x = t.tol_x * self.sigma0;
        let small = (0..self.dim()).all(|i| {
            self.sigma * self.p_c[i].abs() < tol_x && self.sigma * self.cov.get(i, i).sqrt() < tol_x
        });
        if small {
            return Some(TerminationReason::TolX);
        }
        if self.best_history.len() >= self.history_window() {
            let (lo, hi) = self
                .best_history
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
                    (lo.min(*f), hi.max(*f))
                });
            if hi - lo < t.tol_fun {
                return Some(TerminationReason::TolFun);
            }
        }
        if self.last_median == Some(best) {
            return Some(TerminationReason::FlatFitness);
        }
        None
    }

    /// Overrides the step-size. Used by tests and by callers that rescale
    /// the search distribution.
    pub fn set_sigma(&mut self, sigma: f64) {
        assert!(sigma > 0.0 && sigma.is_finite());
        self.sigma = sigma;
    }
}

/// E‖N(0, I_n)‖ ≈ √n (1 − 1/(4n) + 1/(21n²)).
pub fn expected_norm(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}
