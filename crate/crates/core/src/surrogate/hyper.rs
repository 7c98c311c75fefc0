/// Hyper-parameters of one surrogate model.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateHyperParams {
    /// Number of most recent archive points used for training.
    pub n_train: usize,
    /// Coordinate updates per constraint; the optimizer performs at most
    /// `iter_factor × (n − 1)` updates of O(n) each.
    pub iter_factor: f64,
    /// Base cost of violating a ranking constraint.
    pub c_base: f64,
    /// The constraint between ranks i and i+1 costs `c_base · (n − i)^c_pow`.
    pub c_pow: f64,
    /// Multiplier on the data-derived kernel bandwidth.
    pub sigma_factor: f64,
}

/// `⌊40 + 4·D^1.7⌋`, the largest training set used by default.
pub fn n_training_max(dim: usize) -> usize {
    (40.0 + 4.0 * (dim as f64).powf(1.7)).floor() as usize
}

/// Admissible hyper-parameter ranges. `c_base` and `sigma_factor` (and
/// `iter_factor`) are searched on a log scale.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperBox {
    pub n_train: (usize, usize),
    pub iter_factor: (f64, f64),
    pub c_base: (f64, f64),
    pub c_pow: (f64, f64),
    pub sigma_factor: (f64, f64),
}

pub const HYPER_DIMS: usize = 5;

impl HyperBox {
    /// Default box for dimension `dim` and population size `lambda`.
    pub fn for_problem(dim: usize, lambda: usize) -> Self {
        let lo = lambda + 2;
        let hi = n_training_max(dim).max(lo);
        Self {
            n_train: (lo, hi),
            iter_factor: (10.0, 1000.0),
            c_base: (1e2, 1e8),
            c_pow: (0.0, 4.0),
            sigma_factor: (0.5, 2.0),
        }
    }

    /// Maps a point of `[0, 1]^5` (clipped) to hyper-parameters.
    pub fn decode(&self, u: &[f64]) -> SurrogateHyperParams {
        assert_eq!(u.len(), HYPER_DIMS);
        let c = |v: f64| v.clamp(0.0, 1.0);
        let lin = |(a, b): (f64, f64), v: f64| a + (b - a) * c(v);
        let log = |(a, b): (f64, f64), v: f64| (a.ln() + (b.ln() - a.ln()) * c(v)).exp();
        let (nl, nh) = self.n_train;
        let n_train = (nl as f64 + (nh - nl) as f64 * c(u[0])).round() as usize;
        SurrogateHyperParams {
            n_train: n_train.clamp(nl, nh),
            iter_factor: log(self.iter_factor, u[1]),
            c_base: log(self.c_base, u[2]),
            c_pow: lin(self.c_pow, u[3]),
            sigma_factor: log(self.sigma_factor, u[4]),
        }
    }

    /// Inverse of [`decode`](Self::decode) up to rounding of `n_train`.
    pub fn encode(&self, hp: &SurrogateHyperParams) -> Vec<f64> {
        let lin = |(a, b): (f64, f64), v: f64| {
            if b > a {
                ((v - a) / (b - a)).clamp(0.0, 1.0)
            } else {
                0.0
            }
        };
        let log = |(a, b): (f64, f64), v: f64| lin((a.ln(), b.ln()), v.ln());
        let (nl, nh) = self.n_train;
        vec![
            lin((nl as f64, nh as f64), hp.n_train as f64),
            log(self.iter_factor, hp.iter_factor),
            log(self.c_base, hp.c_base),
            lin(self.c_pow, hp.c_pow),
            log(self.sigma_factor, hp.sigma_factor),
        ]
    }

    pub fn contains(&self, hp: &SurrogateHyperParams) -> bool {
        let within = |(a, b): (f64, f64), v: f64| v >= a * (1.0 - 1e-12) && v <= b * (1.0 + 1e-12);
        hp.n_train >= self.n_train.0
            && hp.n_train <= self.n_train.1
            && within(self.iter_factor, hp.iter_factor)
            && within(self.c_base, hp.c_base)
            && hp.c_pow >= self.c_pow.0
            && hp.c_pow <= self.c_pow.1
            && within(self.sigma_factor, hp.sigma_factor)
    }

    /// Default hyper-parameters: the largest training set, 1e6 base cost,
    /// quadratic cost growth, unit bandwidth factor, 100 updates per
    /// constraint.
    pub fn defaults(&self) -> SurrogateHyperParams {
        SurrogateHyperParams {
            n_train: self.n_train.1,
            iter_factor: 100f64.clamp(self.iter_factor.0, self.iter_factor.1),
            c_base: 1e6f64.clamp(self.c_base.0, self.c_base.1),
            c_pow: 2f64.clamp(self.c_pow.0, self.c_pow.1),
            sigma_factor: 1f64.clamp(self.sigma_factor.0, self.sigma_factor.1),
        }
    }
}
