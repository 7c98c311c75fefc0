//! Ranking SVM trained by coordinate ascent on the dual.
//!
//! Points are sorted best-first. For each adjacent pair (i, i+1) the model
//! must satisfy `u(x_i) − u(x_{i+1}) ≥ 1 − ξ_i` with
//! `u(x) = Σ_j α_j (k(x_j, x) − k(x_{j+1}, x))`. The dual is
//!
//! ```text
//! max Σ α_i − ½ αᵀ Q α,   0 ≤ α_i ≤ cost_i,
//! Q_ij = k(i,j) − k(i,j+1) − k(i+1,j) + k(i+1,j+1)
//! ```
//!
//! and each step updates the coordinate whose projected gradient is largest.
//! The score reported to callers is `−u(x)`, so lower is better.

use super::kernel::{sq_dist, KernelTransform};
use super::{SurrogateError, SurrogateHyperParams};
use crate::numerics::{EigenDecomposition, Matrix};

/// Stop once no projected gradient exceeds this.
pub const KKT_TOLERANCE: f64 = 1e-3;

/// A training example: point and true objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub f: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, f: f64) -> Self {
        Self { x, f }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrainStats {
    /// Coordinate updates performed.
    pub updates: usize,
    /// Kernel evaluations for the Gram matrix.
    pub kernel_evals: usize,
    /// Duplicate points removed before training.
    pub dropped_duplicates: usize,
    pub converged: bool,
}

/// Trained ranking model. Immutable.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateModel {
    /// Training points, best first.
    points: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    /// Per-point expansion coefficients `α_k − α_{k−1}` paired with the
    /// transformed point.
    expansion: Vec<(f64, Vec<f64>)>,
    transform: KernelTransform,
    hyper: SurrogateHyperParams,
    stats: TrainStats,
}

impl SurrogateModel {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn transform(&self) -> &KernelTransform {
        &self.transform
    }

    pub fn hyper(&self) -> &SurrogateHyperParams {
        &self.hyper
    }

    pub fn stats(&self) -> TrainStats {
        self.stats
    }

    /// Surrogate score; lower predicts better.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let u = self.transform.apply(x);
        let utility: f64 = self
            .expansion
            .iter()
            .map(|(beta, p)| beta * self.transform.kernel_transformed(p, &u))
            .sum();
        -utility
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Removes exact duplicate points, keeping the later (more recent) copy.
fn drop_duplicates(samples: &[Sample]) -> (Vec<Sample>, usize) {
    let mut kept: Vec<Sample> = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for s in samples.iter().rev() {
        if kept.iter().any(|k| k.x == s.x) {
            dropped += 1;
        } else {
            kept.push(s.clone());
        }
    }
    kept.reverse();
    (kept, dropped)
}

/// Trains a model on `samples` (oldest first). Samples are ranked by `f`
/// internally, ties broken by recency (older first), so only the order of
/// the values matters. Exact duplicate points keep their most recent copy.
pub fn train(
    samples: &[Sample],
    hp: &SurrogateHyperParams,
    transform: KernelTransform,
) -> Result<SurrogateModel, SurrogateError> {
    if samples.iter().any(|s| !s.f.is_finite()) {
        return Err(SurrogateError::InvalidValue);
    }
    let (samples, dropped) = drop_duplicates(samples);
    if dropped > 0 {
        log::warn!("dropped {dropped} duplicate training points");
    }
    if samples.len() < 2 {
        return Err(SurrogateError::NotEnoughData(samples.len()));
    }
    let order = rank_by_value(samples.iter().map(|s| s.f), samples.len());
    let u: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| transform.apply(&samples[i].x))
        .collect();
    let n = u.len();
    let mut sq = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(&u[i], &u[j]);
            sq[i * n + j] = d;
            sq[j * n + i] = d;
        }
    }
    let points = order.iter().map(|&i| samples[i].x.clone()).collect();
    Ok(fit(points, u, &sq, hp, transform, dropped))
}

/// Indices `0..n` sorted by value, ties keeping the earlier index first.
fn rank_by_value(values: impl Iterator<Item = f64>, n: usize) -> Vec<usize> {
    let f: Vec<f64> = values.collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    order
}

/// Solves the dual for points already sorted best-first; `sq` holds their
/// pairwise squared transformed distances.
fn fit(
    points: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    sq: &[f64],
    hp: &SurrogateHyperParams,
    transform: KernelTransform,
    dropped: usize,
) -> SurrogateModel {
    let n = points.len();
    let m = n - 1;
    let mut k = vec![1.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = transform.kernel_from_sq_dist(sq[i * n + j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kernel_evals = n * (n - 1) / 2;
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut q = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = kk(i, j) - kk(i, j + 1) - kk(i + 1, j) + kk(i + 1, j + 1);
            q[i * m + j] = v;
            q[j * m + i] = v;
        }
    }

    let cost: Vec<f64> = (0..m)
        .map(|i| hp.c_base * ((n - 1 - i) as f64).powf(hp.c_pow))
        .collect();
    // Coordinates with a vanishing diagonal cannot move.
    let usable: Vec<bool> = (0..m).map(|i| q[i * m + i] > 1e-12).collect();
    let mut alpha = vec![0.0; m];
    // grad_i = 1 − (Qα)_i
    let mut grad = vec![1.0; m];
    let budget = (hp.iter_factor * m as f64).ceil().max(1.0) as usize;
    let mut updates = 0;
    let (mut i, mut top) = most_violating(&grad, &alpha, &cost, &usable);
    while top > KKT_TOLERANCE && updates < budget {
        let new = (alpha[i] + grad[i] / q[i * m + i]).clamp(0.0, cost[i]);
        let delta = new - alpha[i];
        alpha[i] = new;
        updates += 1;
        let row = &q[i * m..(i + 1) * m];
        for (g, qij) in grad.iter_mut().zip(row) {
            *g -= delta * qij;
        }
        (i, top) = most_violating(&grad, &alpha, &cost, &usable);
    }
    let converged = top <= KKT_TOLERANCE;

    let mut expansion = Vec::new();
    for (p, up) in u.into_iter().enumerate() {
        let prev = if p > 0 { alpha[p - 1] } else { 0.0 };
        let cur = if p < m { alpha[p] } else { 0.0 };
        let beta = cur - prev;
        if beta != 0.0 {
            expansion.push((beta, up));
        }
    }
    SurrogateModel {
        points,
        alpha,
        expansion,
        transform,
        hyper: hp.clone(),
        stats: TrainStats {
            updates,
            kernel_evals,
            dropped_duplicates: dropped,
            converged,
        },
    }
}

/// Index and magnitude of the largest projected gradient (first on ties).
fn most_violating(grad: &[f64], alpha: &[f64], cost: &[f64], usable: &[bool]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (k, (((&g, &a), &c), &ok)) in grad.iter().zip(alpha).zip(cost).zip(usable).enumerate() {
        let blocked = (a <= 0.0 && g < 0.0) || (a >= c && g > 0.0);
        let v = if blocked || !ok { 0.0 } else { g.abs() };
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Archive prepared once for many trainings under the same covariance:
/// transformed coordinates and pairwise distances are shared, and each
/// training uses a window of consecutive samples.
#[derive(Clone, Debug)]
pub struct TrainingPool {
    samples: Vec<Sample>,
    a: Matrix,
    u: Vec<Vec<f64>>,
    sq: Vec<f64>,
}

impl TrainingPool {
    /// `samples` oldest first; `eigen` is the decomposition of the search
    /// covariance defining the metric.
    pub fn new(samples: &[Sample], eigen: &EigenDecomposition) -> Result<Self, SurrogateError> {
        if samples.iter().any(|s| !s.f.is_finite()) {
            return Err(SurrogateError::InvalidValue);
        }
        let n = eigen.dim();
        let a = Matrix::from_fn(n, n, |i, j| eigen.b[(j, i)] / eigen.d[i].sqrt());
        let u: Vec<Vec<f64>> = samples.iter().map(|s| a.mul_vec(&s.x)).collect();
        let len = samples.len();
        let mut sq = vec![0.0; len * len];
        for i in 0..len {
            for j in (i + 1)..len {
                let d = sq_dist(&u[i], &u[j]);
                sq[i * len + j] = d;
                sq[j * len + i] = d;
            }
        }
        Ok(Self {
            samples: samples.to_vec(),
            a,
            u,
            sq,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Trains on the `hp.n_train` samples preceding index `end` (fewer if
    /// the pool is shorter). Equivalent to [`train`] on that window with the
    /// bandwidth derived from the window.
    pub fn train_window(
        &self,
        hp: &SurrogateHyperParams,
        end: usize,
    ) -> Result<SurrogateModel, SurrogateError> {
        let end = end.min(self.len());
        let start = end.saturating_sub(hp.n_train);
        let mut kept: Vec<usize> = Vec::with_capacity(end - start);
        for i in (start..end).rev() {
            if !kept.iter().any(|&k| self.samples[k].x == self.samples[i].x) {
                kept.push(i);
            }
        }
        kept.reverse();
        let dropped = (end - start) - kept.len();
        if dropped > 0 {
            log::warn!("dropped {dropped} duplicate training points");
        }
        if kept.len() < 2 {
            return Err(SurrogateError::NotEnoughData(kept.len()));
        }
        let len = self.len();
        let mut total = 0.0;
        for (p, &i) in kept.iter().enumerate() {
            for &j in &kept[p + 1..] {
                total += self.sq[i * len + j].sqrt();
            }
        }
        let pairs = (kept.len() * (kept.len() - 1) / 2) as f64;
        let mean = total / pairs;
        let sigma_k = if mean > 0.0 {
            hp.sigma_factor * mean
        } else {
            hp.sigma_factor
        };
        let transform = KernelTransform::from_parts(self.a.clone(), sigma_k);

        let order: Vec<usize> = rank_by_value(kept.iter().map(|&i| self.samples[i].f), kept.len())
            .into_iter()
            .map(|r| kept[r])
            .collect();
        let n = order.len();
        let mut sq = vec![0.0; n * n];
        for (p, &i) in order.iter().enumerate() {
            for (q, &j) in order.iter().enumerate() {
                sq[p * n + q] = self.sq[i * len + j];
            }
        }
        let points = order.iter().map(|&i| self.samples[i].x.clone()).collect();
        let u = order.iter().map(|&i| self.u[i].clone()).collect();
        Ok(fit(points, u, &sq, hp, transform, dropped))
    }
}

/// Fraction of discordant pairs between true values and predicted scores.
/// Pairs tied in the prediction (but not in truth) count one half; pairs
/// tied in truth carry no order and count zero. The denominator is always
/// `n(n−1)/2`.
pub fn rank_error_scores(true_f: &[f64], predicted: &[f64]) -> f64 {
    assert_eq!(true_f.len(), predicted.len());
    let n = true_f.len();
    if n < 2 {
        return 0.0;
    }
    let mut bad = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let t = true_f[i].total_cmp(&true_f[j]);
            if t == std::cmp::Ordering::Equal {
                continue;
            }
            let p = predicted[i].total_cmp(&predicted[j]);
            if p == std::cmp::Ordering::Equal {
                bad += 0.5;
            } else if p != t {
                bad += 1.0;
            }
        }
    }
    bad / (n * (n - 1) / 2) as f64
}

/// Rank error of `model` on `points` with true values `true_f`.
pub fn rank_error(model: &SurrogateModel, points: &[Vec<f64>], true_f: &[f64]) -> f64 {
    rank_error_scores(true_f, &model.predict_many(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, Rng, SymMatrix};
    use crate::surrogate::HyperBox;

    fn hp(n: usize) -> SurrogateHyperParams {
        SurrogateHyperParams {
            n_train: n,
            iter_factor: 100.0,
            c_base: 1e6,
            c_pow: 2.0,
            sigma_factor: 1.0,
        }
    }

    fn sphere_samples(rng: &mut Rng, n: usize, d: usize) -> Vec<Sample> {
        (0..n)
            .map(|_| {
                let x = rng.gaussian_vector(d);
                let f = x.iter().map(|v| v * v).sum();
                Sample::new(x, f)
            })
            .collect()
    }

    fn fit(samples: &[Sample], h: &SurrogateHyperParams) -> SurrogateModel {
        let pts: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
        let d = pts[0].len();
        let t = KernelTransform::build(&SymMatrix::identity(d), &pts, h.sigma_factor).unwrap();
        train(samples, h, t).unwrap()
    }

    fn self_rank_error(model: &SurrogateModel, samples: &[Sample]) -> f64 {
        let pts: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
        let f: Vec<f64> = samples.iter().map(|s| s.f).collect();
        rank_error(model, &pts, &f)
    }

    /// Adjacent-pair violations on the training set, checked exhaustively.
    fn adjacent_violations(model: &SurrogateModel) -> f64 {
        let s = model.predict_many(model.points());
        let bad = s.windows(2).filter(|w| w[0] >= w[1]).count();
        bad as f64 / (s.len() - 1) as f64
    }

    #[test]
    fn linear_1d_three_points() {
        let samples = vec![
            Sample::new(vec![2.0], 2.0),
            Sample::new(vec![0.0], 0.0),
            Sample::new(vec![1.0], 1.0),
        ];
        let model = fit(&samples, &hp(3));
        let s = model.predict_many(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert!(s[0] < s[1] && s[1] < s[2], "{s:?}");
    }

    #[test]
    fn sphere_self_consistency() {
        let mut rng = Rng::new(0);
        let samples = sphere_samples(&mut rng, 40, 5);
        let model = fit(&samples, &hp(40));
        assert!(adjacent_violations(&model) <= 0.1);
        assert!(self_rank_error(&model, &samples) <= 0.1);
        let best = &model.points()[0];
        let worst = model.points().last().unwrap();
        assert!(model.predict(best) < model.predict(worst));
    }

    #[test]
    fn deterministic_training() {
        let mut rng = Rng::new(1);
        let samples = sphere_samples(&mut rng, 25, 3);
        let a = fit(&samples, &hp(25));
        let b = fit(&samples, &hp(25));
        assert_eq!(a.alpha(), b.alpha());
        let x = vec![0.1, 0.2, 0.3];
        assert_eq!(a.predict(&x), a.predict(&x));
    }

    #[test]
    fn monotone_transform_invariance() {
        let mut rng = Rng::new(2);
        let samples = sphere_samples(&mut rng, 30, 4);
        let warped: Vec<Sample> = samples
            .iter()
            .map(|s| Sample::new(s.x.clone(), s.f.powi(3) + 7.0))
            .collect();
        let a = fit(&samples, &hp(30));
        let b = fit(&warped, &hp(30));
        assert_eq!(a.alpha(), b.alpha());
    }

    #[test]
    fn duplicates_keep_latest() {
        let samples = vec![
            Sample::new(vec![0.0, 0.0], 5.0),
            Sample::new(vec![1.0, 0.0], 1.0),
            Sample::new(vec![0.0, 0.0], 0.5),
        ];
        let model = fit(&samples, &hp(3));
        assert_eq!(model.stats().dropped_duplicates, 1);
        assert_eq!(model.points()[0], vec![0.0, 0.0]);
        let only = vec![
            Sample::new(vec![1.0, 1.0], 1.0),
            Sample::new(vec![1.0, 1.0], 2.0),
        ];
        let t = KernelTransform::from_parts(Matrix::identity(2), 1.0);
        assert_eq!(
            train(&only, &hp(2), t).unwrap_err(),
            SurrogateError::NotEnoughData(1)
        );
    }

    #[test]
    fn pool_matches_direct_training() {
        let mut rng = Rng::new(4);
        let samples = sphere_samples(&mut rng, 30, 3);
        let c = SymMatrix::from_diag(&[4.0, 1.0, 0.25]);
        let eigen = crate::numerics::sym_eigen(&c).unwrap();
        let pool = TrainingPool::new(&samples, &eigen).unwrap();
        let h = hp(20);
        let from_pool = pool.train_window(&h, 25).unwrap();
        let window = &samples[5..25];
        let pts: Vec<Vec<f64>> = window.iter().map(|s| s.x.clone()).collect();
        let t = KernelTransform::build(&c, &pts, h.sigma_factor).unwrap();
        let direct = train(window, &h, t).unwrap();
        assert_eq!(from_pool.points(), direct.points());
        assert!((from_pool.transform().sigma_k() - direct.transform().sigma_k()).abs() < 1e-12);
        for (a, b) in from_pool.alpha().iter().zip(direct.alpha()) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn rank_error_endpoints() {
        let f = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(rank_error_scores(&f, &[10.0, 20.0, 30.0, 40.0]), 0.0);
        assert_eq!(rank_error_scores(&f, &[4.0, 3.0, 2.0, 1.0]), 1.0);
        assert_eq!(rank_error_scores(&f, &[0.0; 4]), 0.5);
        assert_eq!(rank_error_scores(&[1.0, 2.0], &[2.0, 1.0]), 1.0);
    }

    #[test]
    fn rank_error_permutation_symmetric() {
        let mut rng = Rng::new(6);
        let f = rng.gaussian_vector(12);
        let s = rng.gaussian_vector(12);
        let perm = rng.permutation(12);
        let fp: Vec<f64> = perm.iter().map(|&i| f[i]).collect();
        let sp: Vec<f64> = perm.iter().map(|&i| s[i]).collect();
        assert_eq!(rank_error_scores(&f, &s), rank_error_scores(&fp, &sp));
    }

    #[test]
    fn iteration_budget_bounds_updates() {
        let mut rng = Rng::new(3);
        let samples = sphere_samples(&mut rng, 50, 5);
        let mut h = hp(50);
        h.iter_factor = 0.1;
        let model = fit(&samples, &h);
        assert!(model.stats().updates <= 5);
        let b = HyperBox::for_problem(5, 8);
        assert!(b.contains(&b.defaults()));
    }
}
