use crate::numerics::Rng;
use crate::surrogate::{HyperBox, SurrogateHyperParams, HYPER_DIMS};

const INITIAL_STEP: f64 = 0.1;
const MEAN_RATE: f64 = 0.3;
const MIN_STEP: f64 = 0.01;
const MAX_STEP: f64 = 0.3;

/// One sampled candidate in normalized coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperCandidate {
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub params: SurrogateHyperParams,
}

/// Truncation-selection ES over `[0, 1]^5` with per-coordinate step-sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperOptimizer {
    mean: Vec<f64>,
    steps: Vec<f64>,
    updates: u64,
}

impl Default for HyperOptimizer {
    fn default() -> Self {
        Self::new()
    }
}

impl HyperOptimizer {
    /// Centred in the normalized box.
    pub fn new() -> Self {
        Self {
            mean: vec![0.5; HYPER_DIMS],
            steps: vec![INITIAL_STEP; HYPER_DIMS],
            updates: 0,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn sample(&self, bounds: &HyperBox, count: usize, rng: &mut Rng) -> Vec<HyperCandidate> {
        (0..count)
            .map(|_| {
                let z = rng.gaussian_vector(HYPER_DIMS);
                let u: Vec<f64> = (0..HYPER_DIMS)
                    .map(|i| (self.mean[i] + self.steps[i] * z[i]).clamp(0.0, 1.0))
                    .collect();
                let params = bounds.decode(&u);
                HyperCandidate { u, z, params }
            })
            .collect()
    }

    /// Moves the mean to the centroid of the best quarter and rescales each
    /// step-size by how far the selected steps reached along it.
    pub fn update(&mut self, candidates: &[HyperCandidate], errors: &[f64]) {
        assert_eq!(candidates.len(), errors.len());
        if candidates.is_empty() {
            return;
        }
        let order = rank_candidates(errors);
        let mu = candidates.len().div_ceil(4);
        let selected = &order[..mu];
        for i in 0..HYPER_DIMS {
            let m = selected.iter().map(|&k| candidates[k].u[i]).sum::<f64>() / mu as f64;
            self.mean[i] = (self.mean[i] + MEAN_RATE * (m - self.mean[i])).clamp(0.0, 1.0);
            let rms = (selected
                .iter()
                .map(|&k| candidates[k].z[i].powi(2))
                .sum::<f64>()
                / mu as f64)
                .sqrt();
            self.steps[i] = (self.steps[i] * (0.25 * (rms - 1.0)).exp()).clamp(MIN_STEP, MAX_STEP);
        }
        self.updates += 1;
    }
}

/// Candidate indices best first: lower error, then sampling order.
pub fn rank_candidates(errors: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moves_toward_better_candidates() {
        let b = HyperBox::for_problem(5, 8);
        let mut opt = HyperOptimizer::new();
        let mut rng = Rng::new(0);
        for _ in 0..60 {
            let cands = opt.sample(&b, 20, &mut rng);
            let errs: Vec<f64> = cands.iter().map(|c| (c.u[3] - 0.2).abs()).collect();
            opt.update(&cands, &errs);
        }
        assert!((opt.mean()[3] - 0.2).abs() < 0.05, "{:?}", opt.mean());
    }

    #[test]
    fn ties_keep_sampling_order() {
        assert_eq!(rank_candidates(&[0.1, 0.1, 0.0]), vec![2, 0, 1]);
        assert_eq!(rank_candidates(&[0.0, 0.5, 0.5]), vec![0, 1, 2]);
    }

    #[test]
    fn single_candidate_pulls_mean() {
        let b = HyperBox::for_problem(5, 8);
        let mut opt = HyperOptimizer::new();
        let mut rng = Rng::new(1);
        let cands = opt.sample(&b, 1, &mut rng);
        opt.update(&cands, &[0.3]);
        for (m, u) in opt.mean().iter().zip(&cands[0].u) {
            assert!((m - (0.5 + MEAN_RATE * (u - 0.5))).abs() < 1e-12);
        }
    }
}
