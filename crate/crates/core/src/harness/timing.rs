//! Wall-clock cost of the surrogate-assisted optimizer and of model
//! training.

use std::time::{Duration, Instant};

use super::HarnessError;
use crate::numerics::{hash_seed, Rng, SymMatrix};
use crate::restart::{run_algorithm, Algorithm, AlgorithmSettings};
use crate::surrogate::{n_training_max, train, KernelTransform, Sample, SurrogateHyperParams};
use crate::testbed::{BlackBox, Objective, TestbedError};

#[derive(Clone, Debug, PartialEq)]
pub struct TimingConfig {
    pub fids: Vec<usize>,
    pub dims: Vec<usize>,
    /// True evaluations per (fid, D) point.
    pub evals_per_point: u64,
    /// Wall-clock limit per point.
    pub wallclock_per_point: Duration,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            fids: vec![1, 8, 10, 15],
            dims: vec![2, 5, 10],
            evals_per_point: 2_000,
            wallclock_per_point: Duration::from_secs(60),
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub fid: usize,
    pub dim: usize,
    pub n_training: usize,
    pub cpu_seconds_per_eval: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    /// Log-log slope of mean time per evaluation against D.
    pub slope_vs_dim: Option<f64>,
    /// The same against the training-set size.
    pub slope_vs_n_training: Option<f64>,
}

/// Objective that never reports success and runs dry at a deadline, so the
/// optimizer keeps working for the whole measurement.
struct Timed<'a> {
    inner: &'a mut Objective,
    deadline: Instant,
}

impl BlackBox for Timed<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError> {
        self.inner.evaluate(x)
    }

    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }

    fn remaining(&self) -> Option<u64> {
        if Instant::now() >= self.deadline {
            Some(0)
        } else {
            self.inner.remaining()
        }
    }

    fn solved(&self) -> bool {
        false
    }
}

/// Runs IPOP-s*aACM-ES without hyper-parameter self-adaptation, the
/// training set fixed at `⌊40 + 4·D^1.7⌋`, and reports wall-clock seconds
/// per true evaluation for every (fid, D).
pub fn timing_experiment(cfg: &TimingConfig) -> Result<TimingReport, HarnessError> {
    let mut rows = Vec::new();
    for &dim in &cfg.dims {
        for &fid in &cfg.fids {
            let mut settings = AlgorithmSettings::new(Algorithm::IpopSaAcm);
            settings.saacm.self_adapt = false;
            let mut objective = Objective::new(fid, 1, dim)?.with_budget(cfg.evals_per_point);
            let mut rng = Rng::new(hash_seed(&[cfg.seed, fid as u64, dim as u64]));
            let start = Instant::now();
            let mut timed = Timed {
                inner: &mut objective,
                deadline: start + cfg.wallclock_per_point,
            };
            run_algorithm(&settings, &mut timed, cfg.evals_per_point, &mut rng)?;
            let elapsed = start.elapsed().as_secs_f64();
            let evals = objective.evaluations().max(1);
            rows.push(TimingRow {
                fid,
                dim,
                n_training: n_training_max(dim),
                cpu_seconds_per_eval: elapsed / evals as f64,
            });
        }
    }
    let per_dim = |x: fn(&TimingRow) -> f64| -> Vec<(f64, f64)> {
        cfg.dims
            .iter()
            .map(|&d| {
                let sel: Vec<&TimingRow> = rows.iter().filter(|r| r.dim == d).collect();
                let mean =
                    sel.iter().map(|r| r.cpu_seconds_per_eval).sum::<f64>() / sel.len() as f64;
                (x(sel[0]), mean)
            })
            .collect()
    };
    let slope_vs_dim = loglog_slope(&per_dim(|r| r.dim as f64));
    let slope_vs_n_training = loglog_slope(&per_dim(|r| r.n_training as f64));
    Ok(TimingReport {
        rows,
        slope_vs_dim,
        slope_vs_n_training,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct positive abscissae.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Median wall-clock seconds to train one model on `n` points in dimension
/// `dim` with default hyper-parameters, for every `n` in `sizes`.
pub fn training_scaling(
    dim: usize,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>, HarnessError> {
    let mut out = Vec::new();
    for &n in sizes {
        let mut rng = Rng::new(hash_seed(&[seed, n as u64, dim as u64]));
        let samples: Vec<Sample> = (0..n)
            .map(|_| {
                let x = rng.gaussian_vector(dim);
                let f = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 10f64.powf(3.0 * i as f64 / (dim as f64 - 1.0).max(1.0)) * v * v)
                    .sum();
                Sample::new(x, f)
            })
            .collect();
        let hp = SurrogateHyperParams {
            n_train: n,
            iter_factor: 100.0,
            c_base: 1e6,
            c_pow: 2.0,
            sigma_factor: 1.0,
        };
        let points: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps.max(1) {
            let start = Instant::now();
            let transform = KernelTransform::build(&SymMatrix::identity(dim), &points, 1.0)?;
            let model = train(&samples, &hp, transform)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(model);
        }
        times.sort_by(f64::total_cmp);
        out.push((n, times[times.len() / 2]));
    }
    Ok(out)
}
