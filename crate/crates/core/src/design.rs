//! Design matrices and column standardization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2_sq, Cholesky, Matrix};

/// Regression design `X` (n × m) together with the offsets needed to map
/// coefficients back to the raw column scale.
///
/// Standardized non-intercept columns satisfy `mean = 0` and `||x_j||^2 = n`.
/// The Gram matrix `X'X` is computed once at construction.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    values: Matrix,
    intercept: Option<usize>,
    /// design column index for each raw column, `None` for a prepended intercept
    raw_columns: Vec<usize>,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    gram: Matrix,
    fingerprint: u64,
}

/// Options for [`standardize_design_with`].
#[derive(Debug, Clone, Copy)]
pub struct StandardizeOptions {
    pub add_intercept: bool,
    /// Reject designs whose Gram matrix is numerically singular.
    pub require_full_rank: bool,
}

impl Default for StandardizeOptions {
    fn default() -> Self {
        Self {
            add_intercept: false,
            require_full_rank: true,
        }
    }
}

/// Center and scale every column of `raw` to mean 0 and squared norm `n`.
///
/// With `add_intercept`, an all-ones column already present in `raw` is kept
/// untouched as the intercept; otherwise a ones column is prepended.
pub fn standardize_design(raw: &Matrix, add_intercept: bool) -> Result<DesignMatrix> {
    standardize_design_with(
        raw,
        StandardizeOptions {
            add_intercept,
            require_full_rank: true,
        },
    )
}

pub fn standardize_design_with(raw: &Matrix, opts: StandardizeOptions) -> Result<DesignMatrix> {
    let n = raw.nrows();
    let m_raw = raw.ncols();
    if m_raw == 0 || n == 0 {
        return Err(Error::InvalidInput(
            "design has no columns or no rows".into(),
        ));
    }
    if raw.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "design contains non-finite values".into(),
        ));
    }
    let nf = n as f64;

    let adopted = if opts.add_intercept {
        (0..m_raw).find(|&j| raw.col(j).iter().all(|&v| v == 1.0))
    } else {
        None
    };
    let prepend = opts.add_intercept && adopted.is_none();
    let m = m_raw + usize::from(prepend);
    if m > n {
        return Err(Error::InvalidInput(alloc::format!(
            "design has {m} columns but only {n} rows"
        )));
    }

    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    let mut raw_columns = Vec::with_capacity(m_raw);
    if prepend {
        cols.push(alloc::vec![1.0; n]);
        means.push(0.0);
        scales.push(1.0);
    }
    for j in 0..m_raw {
        raw_columns.push(cols.len());
        let col = raw.col(j);
        if Some(j) == adopted {
            cols.push(col.to_vec());
            means.push(0.0);
            scales.push(1.0);
            continue;
        }
        let mean = col.iter().sum::<f64>() / nf;
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let ss = norm2_sq(&centered);
        if !(ss > 1e-24 * norm2_sq(col)) || ss == 0.0 {
            return Err(Error::ConstantColumn { column: j });
        }
        let s = libm::sqrt(nf / ss);
        cols.push(centered.iter().map(|v| v * s).collect());
        means.push(mean);
        scales.push(s);
    }
    let intercept = if prepend {
        Some(0)
    } else {
        adopted.map(|j| raw_columns[j])
    };
    build(
        Matrix::from_columns(&cols),
        intercept,
        raw_columns,
        means,
        scales,
        opts.require_full_rank,
    )
}

fn build(
    values: Matrix,
    intercept: Option<usize>,
    raw_columns: Vec<usize>,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    require_full_rank: bool,
) -> Result<DesignMatrix> {
    let gram = values.gram();
    if require_full_rank {
        if let Err(e) = Cholesky::factor(&gram) {
            return Err(Error::RankDeficient { column: e.index });
        }
    }
    let fingerprint = fingerprint(values.as_slice(), values.nrows());
    Ok(DesignMatrix {
        values,
        intercept,
        raw_columns,
        column_means,
        column_scales,
        gram,
        fingerprint,
    })
}

/// FNV-1a over the bit patterns; identifies the data a path was computed from.
pub(crate) fn fingerprint(values: &[f64], salt: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt as u64;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

impl DesignMatrix {
    /// Use `values` as-is (no centering or scaling). The Gram matrix must be
    /// nonsingular.
    pub fn from_matrix(values: Matrix) -> Result<Self> {
        Self::from_matrix_with(values, true)
    }

    pub fn from_matrix_with(values: Matrix, require_full_rank: bool) -> Result<Self> {
        let (n, m) = (values.nrows(), values.ncols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(
                "design has no columns or no rows".into(),
            ));
        }
        if m > n {
            return Err(Error::InvalidInput(alloc::format!(
                "design has {m} columns but only {n} rows"
            )));
        }
        build(
            values,
            None,
            (0..m).collect(),
            alloc::vec![0.0; m],
            alloc::vec![1.0; m],
            require_full_rank,
        )
    }

    #[inline]
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        self.values.col(j)
    }

    /// `X'X`
    #[inline]
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept.is_some()
    }

    /// Design column holding the intercept, if any.
    pub fn intercept_column(&self) -> Option<usize> {
        self.intercept
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Raw column behind design column `j`; `None` for a prepended intercept.
    pub fn raw_index(&self, j: usize) -> Option<usize> {
        self.raw_columns.iter().position(|&d| d == j)
    }

    /// `X b`
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        self.values.mul_vec(beta)
    }

    /// `X' v`
    pub fn correlations(&self, v: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|j| dot(self.col(j), v)).collect()
    }

    /// Map design-scale coefficients to the raw column scale.
    ///
    /// Returns `(offset, coefficients)` with one coefficient per raw column
    /// such that `raw * coefficients + offset` equals `X * beta`.
    pub fn original_coefficients(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(beta.len(), self.m());
        let mut offset = 0.0;
        if let Some(i) = self.intercept {
            if !self.raw_columns.contains(&i) {
                offset += beta[i];
            }
        }
        let coefs = self
            .raw_columns
            .iter()
            .map(|&d| {
                let c = beta[d] * self.column_scales[d];
                offset -= self.column_means[d] * c;
                c
            })
            .collect();
        (offset, coefs)
    }

    /// Apply the stored centering/scaling to raw rows (same layout as the
    /// matrix this design was built from).
    pub fn transform(&self, raw: &Matrix) -> Matrix {
        assert_eq!(raw.ncols(), self.raw_columns.len());
        let mut out = Matrix::zeros(raw.nrows(), self.m());
        if let Some(i) = self.intercept {
            out.col_mut(i).iter_mut().for_each(|v| *v = 1.0);
        }
        for (j, &d) in self.raw_columns.iter().enumerate() {
            let (mu, s) = (self.column_means[d], self.column_scales[d]);
            for (o, r) in out.col_mut(d).iter_mut().zip(raw.col(j)) {
                *o = (r - mu) * s;
            }
        }
        out
    }
}
