//! Dense matrices, a cyclic Jacobi eigensolver for symmetric matrices, and
//! random orthogonal matrices. Sized for D <= 40; nothing here is blocked or
//! vectorised.

use std::ops::{Index, IndexMut};

use super::rng::Rng;
use super::NumericsError;

/// Off-diagonal Frobenius norm (relative to the full norm) at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Maximum number of Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues below `EIGEN_CLAMP * max eigenvalue` are raised to that value.
pub const EIGEN_CLAMP: f64 = 1e-14;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense symmetric matrix with full storage. Every write goes to both
/// triangles, so `m[(i, j)] == m[(j, i)]` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    /// Symmetrises `m` by copying its upper triangle onto the lower one.
    pub fn from_upper(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols(), "matrix must be square");
        let n = m.rows();
        Self(Matrix::from_fn(n, n, |i, j| {
            if i <= j {
                m[(i, j)]
            } else {
                m[(j, i)]
            }
        }))
    }

    /// Reconstructs `B · diag(d) · Bᵀ`.
    pub fn from_eigen(b: &Matrix, d: &[f64]) -> Self {
        let n = d.len();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    s += b[(i, k)] * dk * b[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        Self(out)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.0.mul_vec(v)
    }

    /// `self ← scale·self + Σ_k coef_k · v_k v_kᵀ`, written on the upper
    /// triangle and mirrored.
    pub fn scale_add_outer(&mut self, scale: f64, terms: &[(f64, &[f64])]) {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                let mut s = scale * self.get(i, j);
                for (c, v) in terms {
                    s += c * v[i] * v[j];
                }
                self.set(i, j, s);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

/// Eigen decomposition `C = B · diag(d) · Bᵀ` of a symmetric positive
/// (after clamping) matrix. Eigenvalues sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    /// Orthonormal eigenvectors as columns.
    pub b: Matrix,
    /// Eigenvalues, descending, all strictly positive.
    pub d: Vec<f64>,
    /// Number of eigenvalues that were raised to the clamp floor.
    pub clamped: usize,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// `max d / min d` after clamping.
    pub fn condition(&self) -> f64 {
        self.d[0] / self.d[self.d.len() - 1]
    }

    /// `B · diag(√d) · z`, the map from standard normal to `N(0, C)`.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = z
            .iter()
            .zip(&self.d)
            .map(|(zi, di)| zi * di.sqrt())
            .collect();
        self.b.mul_vec(&scaled)
    }

    /// `C^{-1/2} · y = B · diag(1/√d) · Bᵀ · y`.
    pub fn inv_sqrt_mul(&self, y: &[f64]) -> Vec<f64> {
        let t = self.b.tr_mul_vec(y);
        let scaled: Vec<f64> = t
            .iter()
            .zip(&self.d)
            .map(|(ti, di)| ti / di.sqrt())
            .collect();
        self.b.mul_vec(&scaled)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_eigen(&self.b, &self.d)
    }
}

/// Raw cyclic Jacobi eigensolver: eigenvalues (descending, unclamped, may be
/// negative) and eigenvector columns.
pub fn jacobi_eigen(c: &SymMatrix) -> Result<(Vec<f64>, Matrix), NumericsError> {
    let n = c.dim();
    if n == 0 {
        return Err(NumericsError::InvalidMatrix("empty matrix"));
    }
    if !c.is_finite() {
        return Err(NumericsError::InvalidMatrix("non-finite entry"));
    }
    let mut a = c.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let total = a.frobenius();
    if total > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * a[(i, j)] * a[(i, j)];
                }
            }
            if off.sqrt() <= JACOBI_TOLERANCE * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    rotate(&mut a, &mut v, p, q, cs, sn, t);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let d: Vec<f64> = order.iter().map(|&k| a[(k, k)]).collect();
    let b = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((d, b))
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, cs: f64, sn: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let np = cs * arp - sn * arq;
            let nq = sn * arp + cs * arq;
            a[(r, p)] = np;
            a[(p, r)] = np;
            a[(r, q)] = nq;
            a[(q, r)] = nq;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = cs * vrp - sn * vrq;
        v[(r, q)] = sn * vrp + cs * vrq;
    }
}

/// Eigen decomposition with eigenvalues clamped from below at
/// `EIGEN_CLAMP × max eigenvalue`.
pub fn sym_eigen(c: &SymMatrix) -> Result<EigenDecomposition, NumericsError> {
    let (mut d, b) = jacobi_eigen(c)?;
    let top = d[0];
    if top <= 0.0 || !top.is_finite() {
        return Err(NumericsError::InvalidMatrix("no positive eigenvalue"));
    }
    let floor = EIGEN_CLAMP * top;
    let mut clamped = 0;
    for di in d.iter_mut() {
        if *di < floor {
            *di = floor;
            clamped += 1;
        }
    }
    Ok(EigenDecomposition { b, d, clamped })
}

/// Random orthogonal matrix: modified Gram-Schmidt (applied twice) on the
/// columns of a standard Gaussian matrix.
pub fn random_orthogonal(rng: &mut Rng, d: usize) -> Matrix {
    assert!(d >= 1, "dimension must be positive");
    let mut cols: Vec<Vec<f64>> = (0..d).map(|_| rng.gaussian_vector(d)).collect();
    for j in 0..d {
        for _ in 0..2 {
            for k in 0..j {
                let proj = dot(&cols[j], &cols[k]);
                let (head, tail) = cols.split_at_mut(j);
                for (x, y) in tail[0].iter_mut().zip(&head[k]) {
                    *x -= proj * y;
                }
            }
        }
        let n = norm(&cols[j]);
        cols[j].iter_mut().for_each(|x| *x /= n);
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}
