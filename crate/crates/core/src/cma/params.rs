//! Strategy parameters.
//!
//! Default values (n = dimension, w' the raw log-linear weights):
//!
//! | symbol  | value |
//! |---------|-------|
//! | λ       | 4 + ⌊3 ln n⌋ |
//! | μ       | ⌊λ/2⌋ |
//! | w'_i    | ln((λ+1)/2) − ln i, i = 1..λ |
//! | μ_eff   | (Σ_{i≤μ} w'_i)² / Σ_{i≤μ} w'_i² |
//! | c_σ     | (μ_eff + 2) / (n + μ_eff + 5) |
//! | d_σ     | 1 + 2·max(0, √((μ_eff − 1)/(n + 1)) − 1) + c_σ |
//! | c_c     | (4 + μ_eff/n) / (n + 4 + 2μ_eff/n) |
//! | c_1     | 2 / ((n + 1.3)² + μ_eff) |
//! | c_μ     | min(1 − c_1, 2(μ_eff − 2 + 1/μ_eff + 1/4) / ((n + 2)² + μ_eff)) |
//! | w_i>μ   | w'_i · min(1 + c_1/c_μ, 1 + 2μ⁻_eff/(μ_eff + 2), (1 − c_1 − c_μ)/(n c_μ)) / Σ_{i>μ}\|w'_i\| |
//!
//! Positive weights are normalised to sum to one. The negative weights are
//! only used by the active update and are zero otherwise.

use super::CmaError;

#[derive(Clone, Debug, PartialEq)]
pub struct CmaParams {
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    /// Recombination weights of the μ best points, decreasing, summing to 1.
    pub weights: Vec<f64>,
    /// Weights of the λ − μ worst points (best of them first), all ≤ 0.
    pub neg_weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c1: f64,
    pub c_mu: f64,
    pub active: bool,
}

impl CmaParams {
    /// Default population size for dimension `dim`.
    pub fn default_lambda(dim: usize) -> usize {
        4 + (3.0 * (dim as f64).ln()).floor() as usize
    }

    /// Defaults for `dim`, optionally with a custom population size.
    pub fn new(dim: usize, lambda_override: Option<usize>, active: bool) -> Result<Self, CmaError> {
        if dim == 0 {
            return Err(CmaError::InvalidParam("dimension must be positive".into()));
        }
        let lambda = match lambda_override {
            Some(l) if l < 2 => {
                return Err(CmaError::InvalidParam(format!(
                    "lambda must be >= 2, got {l}"
                )))
            }
            Some(l) => l,
            None => Self::default_lambda(dim),
        };
        let mu = lambda / 2;
        let n = dim as f64;

        let raw: Vec<f64> = (1..=lambda)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let pos_sum: f64 = raw[..mu].iter().sum();
        let pos_sq: f64 = raw[..mu].iter().map(|w| w * w).sum();
        let mu_eff = pos_sum * pos_sum / pos_sq;

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let alpha_cov = 2.0;
        let c1 = alpha_cov / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c1).min(
            alpha_cov * (0.25 + mu_eff + 1.0 / mu_eff - 2.0)
                / ((n + 2.0).powi(2) + alpha_cov * mu_eff / 2.0),
        );

        let weights: Vec<f64> = raw[..mu].iter().map(|w| w / pos_sum).collect();
        let neg_raw = &raw[mu..];
        let neg_weights = if active && !neg_raw.is_empty() {
            let neg_abs: f64 = neg_raw.iter().map(|w| w.abs()).sum();
            let neg_sq: f64 = neg_raw.iter().map(|w| w * w).sum();
            if neg_abs > 0.0 {
                let mu_eff_neg = neg_abs * neg_abs / neg_sq;
                let alpha_mu = 1.0 + c1 / c_mu;
                let alpha_mu_eff = 1.0 + 2.0 * mu_eff_neg / (mu_eff + 2.0);
                let alpha_posdef = (1.0 - c1 - c_mu) / (n * c_mu);
                let scale = alpha_mu.min(alpha_mu_eff).min(alpha_posdef) / neg_abs;
                neg_raw.iter().map(|w| (w * scale).min(0.0)).collect()
            } else {
                vec![0.0; neg_raw.len()]
            }
        } else {
            vec![0.0; neg_raw.len()]
        };

        Ok(Self {
            dim,
            lambda,
            mu,
            weights,
            neg_weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c1,
            c_mu,
            active,
        })
    }

    /// Sum of all weights, negative ones included.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.neg_weights.iter().sum::<f64>()
    }

    pub fn validate(&self) -> Result<(), CmaError> {
        let bad = |m: &str| Err(CmaError::InvalidParam(m.to_string()));
        if self.lambda < 2 {
            return bad("lambda must be >= 2");
        }
        if self.mu < 1 || self.mu > self.lambda.div_ceil(2) {
            return bad("mu must lie in [1, ceil(lambda/2)]");
        }
        if self.weights.len() != self.mu || self.neg_weights.len() != self.lambda - self.mu {
            return bad("weight vector lengths do not match mu and lambda");
        }
        if self.weights.iter().any(|w| *w < 0.0) || self.neg_weights.iter().any(|w| *w > 0.0) {
            return bad("weight signs are wrong");
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return bad("positive weights must sum to 1");
        }
        for (name, v) in [("c_sigma", self.c_sigma), ("c_c", self.c_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CmaError::InvalidParam(format!("{name} outside [0, 1]")));
            }
        }
        if self.c1 < 0.0 || self.c_mu < 0.0 || self.c1 + self.c_mu > 1.0 {
            return bad("c1 + c_mu must lie in [0, 1]");
        }
        if !(self.d_sigma > 0.0) {
            return bad("d_sigma must be positive");
        }
        Ok(())
    }
}

/// Default parameters; see [`CmaParams::new`].
pub fn default_params(
    dim: usize,
    lambda_override: Option<usize>,
    active: bool,
) -> Result<CmaParams, CmaError> {
    CmaParams::new(dim, lambda_override, active)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lambda_values() {
        assert_eq!(default_params(10, None, false).unwrap().lambda, 10);
        assert_eq!(default_params(2, None, false).unwrap().lambda, 6);
        assert_eq!(default_params(5, None, false).unwrap().lambda, 8);
        assert_eq!(default_params(20, None, false).unwrap().lambda, 12);
    }

    #[test]
    fn weights_normalised_and_decreasing() {
        for d in [1, 2, 3, 5, 10, 20, 40] {
            for active in [false, true] {
                let p = default_params(d, None, active).unwrap();
                p.validate().unwrap();
                assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(p.weights.windows(2).all(|w| w[0] >= w[1]));
                assert!(*p.weights.last().unwrap() > 0.0);
                if active {
                    assert!(p.neg_weights.iter().any(|w| *w < 0.0));
                } else {
                    assert!(p.neg_weights.iter().all(|w| *w == 0.0));
                }
            }
        }
    }

    #[test]
    fn rejects_small_lambda() {
        assert!(matches!(
            default_params(5, Some(1), true),
            Err(CmaError::InvalidParam(_))
        ));
        assert!(default_params(5, Some(2), true).is_ok());
    }

    #[test]
    fn large_population_is_valid() {
        let p = default_params(10, Some(640), true).unwrap();
        p.validate().unwrap();
        assert_eq!(p.mu, 320);
    }
}
