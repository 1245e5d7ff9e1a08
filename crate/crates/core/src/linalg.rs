//! Small dense linear algebra used by the solvers.
//!
//! Everything here is sized for desk-scale regression problems (a few
//! hundred rows, at most a few dozen columns), so plain `Vec<f64>` storage
//! and textbook algorithms are adequate.

use alloc::vec;
use alloc::vec::Vec;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = 1.0;
        }
        out
    }

    /// Builds a matrix from row slices. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut out = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), ncols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for c in cols {
            let c = c.as_ref();
            assert_eq!(c.len(), nrows, "ragged columns");
            data.extend_from_slice(c);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(nrows, ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                out[(i, j)] = f(i, j);
            }
        }
        out
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.ncols).map(|j| self[(i, j)]).collect()
    }

    /// Raw column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `A v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.col(j), &mut out);
            }
        }
        out
    }

    /// `A' v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.nrows);
        (0..self.ncols).map(|j| dot(self.col(j), v)).collect()
    }

    /// `A' A`
    pub fn gram(&self) -> Matrix {
        let m = self.ncols;
        let mut g = Matrix::zeros(m, m);
        for j in 0..m {
            for k in 0..=j {
                let v = dot(self.col(j), self.col(k));
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    /// Submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.nrows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            nrows: self.nrows,
            ncols: idx.len(),
            data,
        }
    }

    /// Principal submatrix `A[idx, idx]`.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[j * self.nrows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[j * self.nrows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A Cholesky factor was requested of a matrix that is not numerically
/// positive definite. `index` is the offending pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub index: usize,
}

/// Relative pivot threshold below which a Gram matrix is treated as singular.
pub const RANK_TOL: f64 = 1e-12;

/// Absolute floor on the factor diagonal after an update; below it the
/// factor is rebuilt from scratch.
pub const REFACTOR_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `A = L L'`, stored row by row.
///
/// Supports growing by one bordered row/column, deleting an arbitrary
/// row/column, and symmetric rank-one updates and downdates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    /// Factor a symmetric matrix. Pivots with `d <= RANK_TOL * a_jj` are rejected.
    pub fn factor(a: &Matrix) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.nrows(), a.ncols());
        let mut chol = Self::empty();
        for j in 0..a.nrows() {
            let border: Vec<f64> = (0..j).map(|i| a[(j, i)]).collect();
            chol.push(&border, a[(j, j)])?;
        }
        Ok(chol)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.rows[i][j]
        }
    }

    pub fn min_diagonal(&self) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// Extend `A` by one row/column: `border` holds the off-diagonal
    /// entries against the existing indices and `diag` the new diagonal.
    pub fn push(&mut self, border: &[f64], diag: f64) -> Result<(), NotPositiveDefinite> {
        let k = self.dim();
        assert_eq!(border.len(), k);
        let mut row = self.forward(border);
        let d = diag - norm2_sq(&row);
        if !(d > RANK_TOL * diag.abs()) || !d.is_finite() {
            return Err(NotPositiveDefinite { index: k });
        }
        row.push(libm::sqrt(d));
        self.rows.push(row);
        Ok(())
    }

    /// Delete row/column `k` of `A` and restore triangular form.
    pub fn remove(&mut self, k: usize) {
        let n = self.dim();
        assert!(k < n);
        self.rows.remove(k);
        // Column k of the trailing rows becomes a rank-one term on the trailing block.
        let mut v: Vec<f64> = self.rows[k..].iter_mut().map(|r| r.remove(k)).collect();
        for j in 0..v.len() {
            let jj = k + j;
            let ljj = self.rows[jj][jj];
            let r = libm::hypot(ljj, v[j]);
            let c = r / ljj;
            let s = v[j] / ljj;
            self.rows[jj][jj] = r;
            for i in (j + 1)..v.len() {
                let ii = k + i;
                let lij = (self.rows[ii][jj] + s * v[i]) / c;
                v[i] = c * v[i] - s * lij;
                self.rows[ii][jj] = lij;
            }
        }
    }

    /// Replace the factor of `A` by that of `A + x x'`.
    pub fn rank_one_update(&mut self, x: &[f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut v = x.to_vec();
        for j in 0..n {
            let ljj = self.rows[j][j];
            let r = libm::hypot(ljj, v[j]);
            let c = r / ljj;
            let s = v[j] / ljj;
            self.rows[j][j] = r;
            for i in (j + 1)..n {
                let lij = (self.rows[i][j] + s * v[i]) / c;
                v[i] = c * v[i] - s * lij;
                self.rows[i][j] = lij;
            }
        }
    }

    /// Replace the factor of `A` by that of `A - x x'`. Fails if the result
    /// would not be positive definite; the factor is left unchanged then.
    pub fn rank_one_downdate(&mut self, x: &[f64]) -> Result<(), NotPositiveDefinite> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut work = self.rows.clone();
        let mut v = x.to_vec();
        for j in 0..n {
            let ljj = work[j][j];
            let r2 = (ljj - v[j]) * (ljj + v[j]);
            if !(r2 > 0.0) {
                return Err(NotPositiveDefinite { index: j });
            }
            let r = libm::sqrt(r2);
            let c = r / ljj;
            let s = v[j] / ljj;
            work[j][j] = r;
            for i in (j + 1)..n {
                let lij = (work[i][j] - s * v[i]) / c;
                v[i] = c * v[i] - s * lij;
                work[i][j] = lij;
            }
        }
        self.rows = work;
        Ok(())
    }

    /// Solve `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        assert!(n <= self.dim());
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let row = &self.rows[i];
            let s = b[i] - dot(&row[..i], &z);
            z.push(s / row[i]);
        }
        z
    }

    /// Solve `L' x = z`.
    pub fn backward(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(z.len(), n);
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.rows[i][i];
            let xi = x[i];
            for k in 0..i {
                x[k] -= self.rows[i][k] * xi;
            }
        }
        x
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim());
        self.backward(&self.forward(b))
    }

    /// Reassemble `L L'`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            (0..=i.min(j)).map(|k| self.l(i, k) * self.l(j, k)).sum()
        })
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in ascending order; column `k` of `vectors`
/// is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn new(a: &Matrix) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let mut a = a.clone();
        let mut v = Matrix::identity(n);
        for _sweep in 0..100 {
            let mut off = 0.0;
            let mut diag = 0.0;
            for j in 0..n {
                diag += a[(j, j)] * a[(j, j)];
                for i in 0..j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off <= 1e-30 * diag || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
        let values = order.iter().map(|&k| a[(k, k)]).collect();
        let vectors = v.select_columns(&order);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}
