//! Building blocks shared by the function definitions.

/// Oscillation transform of a scalar.
pub fn t_osz_scalar(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xh = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xh + 0.049 * ((c1 * xh).sin() + (c2 * xh).sin())).exp()
}

/// Element-wise oscillation transform.
pub fn t_osz(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| t_osz_scalar(v)).collect()
}

/// Asymmetry transform: positive coordinates are raised to
/// `1 + β·(i/(D−1))·√x_i`, the others pass through.
pub fn t_asy(x: &[f64], beta: f64) -> Vec<f64> {
    let d = x.len();
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                v.powf(1.0 + beta * ratio(i, d) * v.sqrt())
            } else {
                v
            }
        })
        .collect()
}

/// Diagonal of the conditioning matrix Λ^α: `α^{i/(2(D−1))}`, i = 0..D−1.
pub fn lambda_alpha(alpha: f64, d: usize) -> Vec<f64> {
    (0..d).map(|i| alpha.powf(0.5 * ratio(i, d))).collect()
}

/// `i/(D−1)`, defined as 0 in dimension 1.
pub fn ratio(i: usize, d: usize) -> f64 {
    if d <= 1 {
        0.0
    } else {
        i as f64 / (d - 1) as f64
    }
}

/// Boundary penalty `Σ max(0, |x_i| − 5)²`.
pub fn f_pen(x: &[f64]) -> f64 {
    x.iter().map(|v| (v.abs() - 5.0).max(0.0).powi(2)).sum()
}

pub fn scale(diag: &[f64], x: &[f64]) -> Vec<f64> {
    diag.iter().zip(x).map(|(a, b)| a * b).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_osz_fixed_point_and_sign() {
        assert_eq!(t_osz(&[0.0]), vec![0.0]);
        assert_eq!(t_osz_scalar(1.0), 1.0);
        assert!(t_osz_scalar(-2.0) < 0.0);
        // Monotone on a grid.
        let xs: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.05).collect();
        let ys = t_osz(&xs);
        assert!(ys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn t_asy_identity_on_non_positive() {
        let x = [-3.0, -0.5, 0.0, -1e-9];
        assert_eq!(t_asy(&x, 0.5), x.to_vec());
        // First coordinate has exponent 1 regardless of β.
        assert_eq!(t_asy(&[2.0, 2.0], 0.5)[0], 2.0);
        let y = t_asy(&[2.0, 2.0], 0.5);
        assert!((y[1] - 2f64.powf(1.0 + 0.5 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn lambda_alpha_condition() {
        for d in [2, 5, 10] {
            let l = lambda_alpha(100.0, d);
            assert_eq!(l[0], 1.0);
            assert!((l[d - 1] / l[0] - 10.0).abs() < 1e-12);
            assert!(l.windows(2).all(|w| w[0] < w[1]));
        }
        let l = lambda_alpha(10.0, 3);
        assert!((l[1] - 10f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn penalty_zero_inside_box() {
        assert_eq!(f_pen(&[5.0, -5.0, 0.0]), 0.0);
        assert_eq!(f_pen(&[6.0, -7.0]), 1.0 + 4.0);
    }
}
