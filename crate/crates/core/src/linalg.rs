//! Dense complex matrices on particle ⊗ Fock spaces.
//!
//! `OperatorMatrix` is a thin wrapper over a square `faer::Mat` with the handful
//! of operations the rest of the crate needs.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    mat: Mat<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { mat: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_mat(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrices are square");
        Self { mat }
    }

    /// Build from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.mat[(i, i)] = d;
        }
        m
    }

    pub fn diagonal_real(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] += v;
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.mat[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint().to_owned() }
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose().to_owned() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: &self.mat - &other.mat }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.mat[(i, j)] * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `self - z * 1`.
    pub fn shift(&self, z: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.mat[(i, i)] -= z;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Kronecker product with `self` as the outer (slow) index.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        Self::from_fn(a * b, |i, j| {
            self.mat[(i / b, j / b)] * other.mat[(i % b, j % b)]
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let vj = v[j];
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.mat.col(j);
            for i in 0..n {
                out[i] += col[i] * vj;
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<C64> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.mat[(rows[i], cols[j])])
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self { mat: self.submatrix(idx, idx) }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        match self.mat.singular_values() {
            Ok(s) => s.iter().cloned().fold(0.0, f64::max),
            Err(_) => self.frobenius_norm(),
        }
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.mat
            .singular_values()
            .map_err(|e| Error::Eigen(format!("{e:?}")))
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.mat[(i, j)].is_finite()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        let scale = self.max_abs().max(1.0);
        for j in 0..n {
            for i in 0..=j {
                if (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse via partially pivoted LU; fails on non-finite output or a
    /// reconstruction defect above `1e-6`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim();
        if n == 0 {
            return Ok(Self::zeros(0));
        }
        let inv = self.mat.partial_piv_lu().inverse();
        let out = Self { mat: inv };
        if !out.is_finite() {
            return Err(Error::Singular("non-finite inverse".into()));
        }
        let defect = self.matmul(&out).shift(C64::new(1.0, 0.0)).max_abs();
        if defect > 1e-6 {
            return Err(Error::Singular(format!(
                "inverse defect {defect:.3e}"
            )));
        }
        Ok(out)
    }
}

/// Eigenvalues and right eigenvectors (columns) of a general matrix.
pub fn eig(m: &OperatorMatrix) -> Result<(Vec<C64>, OperatorMatrix)> {
    if m.dim() == 0 {
        return Ok((vec![], OperatorMatrix::zeros(0)));
    }
    if !m.is_finite() {
        return Err(Error::Eigen("non-finite matrix".into()));
    }
    let e = m.mat.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, OperatorMatrix { mat: e.U().to_owned() }))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn eigh(m: &OperatorMatrix) -> Result<(Vec<f64>, OperatorMatrix)> {
    if m.dim() == 0 {
        return Ok((vec![], OperatorMatrix::zeros(0)));
    }
    if !m.is_finite() {
        return Err(Error::Eigen("non-finite matrix".into()));
    }
    let e = m
        .mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals = e.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, OperatorMatrix { mat: e.U().to_owned() }))
}

/// Smallest singular value and its right singular vector.
pub fn smallest_singular_vector(m: &OperatorMatrix) -> Result<(f64, Vec<C64>)> {
    if m.dim() == 0 {
        return Err(Error::Eigen("empty matrix".into()));
    }
    let svd = m.mat.svd().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let i = (0..s.len())
        .min_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap())
        .expect("nonempty");
    let v = svd.V();
    Ok((s[i], (0..m.dim()).map(|r| v[(r, i)]).collect()))
}

pub fn column(m: &OperatorMatrix, j: usize) -> Vec<C64> {
    (0..m.dim()).map(|i| m.get(i, j)).collect()
}

pub fn row(m: &OperatorMatrix, i: usize) -> Vec<C64> {
    (0..m.dim()).map(|j| m.get(i, j)).collect()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product, conjugate-linear in the first slot.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
