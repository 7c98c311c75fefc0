use super::SurrogateError;
use crate::numerics::{sym_eigen, EigenDecomposition, Matrix, SymMatrix};

/// RBF kernel on the coordinates `A·x` with `A = diag(1/√d)·Bᵀ`, i.e. on the
/// Mahalanobis distance induced by the search covariance `C = B·diag(d)·Bᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTransform {
    a: Matrix,
    sigma_k: f64,
}

impl KernelTransform {
    /// `A = C^{-1/2}` and bandwidth `sigma_factor ×` the average pairwise
    /// transformed distance of `points`.
    pub fn build(
        c: &SymMatrix,
        points: &[Vec<f64>],
        sigma_factor: f64,
    ) -> Result<Self, SurrogateError> {
        let eigen = sym_eigen(c)?;
        Self::from_eigen(&eigen, points, sigma_factor)
    }

    pub fn from_eigen(
        eigen: &EigenDecomposition,
        points: &[Vec<f64>],
        sigma_factor: f64,
    ) -> Result<Self, SurrogateError> {
        if points.len() < 2 {
            return Err(SurrogateError::NotEnoughData(points.len()));
        }
        let n = eigen.dim();
        let a = Matrix::from_fn(n, n, |i, j| eigen.b[(j, i)] / eigen.d[i].sqrt());
        let mut t = Self { a, sigma_k: 1.0 };
        let u: Vec<Vec<f64>> = points.iter().map(|p| t.apply(p)).collect();
        let mean = mean_pairwise_distance(&u);
        t.sigma_k = if mean > 0.0 {
            sigma_factor * mean
        } else {
            sigma_factor
        };
        Ok(t)
    }

    /// Explicit transform, mostly for tests.
    pub fn from_parts(a: Matrix, sigma_k: f64) -> Self {
        assert!(sigma_k > 0.0);
        Self { a, sigma_k }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_vec(x)
    }

    /// Kernel value on already transformed coordinates.
    pub fn kernel_transformed(&self, u: &[f64], v: &[f64]) -> f64 {
        self.kernel_from_sq_dist(sq_dist(u, v))
    }

    pub fn kernel_from_sq_dist(&self, d2: f64) -> f64 {
        (-d2 / (2.0 * self.sigma_k * self.sigma_k)).exp()
    }

    pub fn kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        self.kernel_transformed(&self.apply(x), &self.apply(y))
    }

    /// Distance between `x` and `y` in the transformed space.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        sq_dist(&self.apply(x), &self.apply(y)).sqrt()
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_pairwise_distance(u: &[Vec<f64>]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += sq_dist(&u[i], &u[j]).sqrt();
        }
    }
    s / (n * (n - 1) / 2) as f64
}

/// Builds the transform of `C` with bandwidth 1, handy for tests.
pub fn build_transform(
    c: &SymMatrix,
    points: &[Vec<f64>],
    sigma_factor: f64,
) -> Result<KernelTransform, SurrogateError> {
    KernelTransform::build(c, points, sigma_factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_covariance() {
        let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let t = build_transform(&SymMatrix::identity(2), &pts, 1.0).unwrap();
        assert_eq!(t.matrix(), &Matrix::identity(2));
        assert_eq!(t.sigma_k(), 5.0);
        assert_eq!(t.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn diagonal_covariance() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t = build_transform(&SymMatrix::from_diag(&[4.0, 1.0]), &pts, 1.0).unwrap();
        assert_eq!(t.matrix(), &Matrix::from_diag(&[0.5, 1.0]));
    }

    #[test]
    fn self_kernel_is_one() {
        let pts = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, -1.0, 0.5],
            vec![2.0, 2.0, 2.0],
        ];
        let mut c = SymMatrix::from_diag(&[3.0, 2.0, 0.1]);
        c.set(0, 1, 0.5);
        let t = build_transform(&c, &pts, 0.7).unwrap();
        for p in &pts {
            assert_eq!(t.kernel(p, p), 1.0);
        }
        assert!(t.kernel(&pts[0], &pts[1]) < 1.0);
    }

    #[test]
    fn needs_two_points() {
        let err = build_transform(&SymMatrix::identity(2), &[vec![0.0, 0.0]], 1.0).unwrap_err();
        assert_eq!(err, SurrogateError::NotEnoughData(1));
    }
}
