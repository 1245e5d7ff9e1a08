//! SURE criteria for plain and scaled LASSO, the ridge-stabilized noise
//! variance estimate, and λ selection.

use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::error::{check_len, Error, Result};
use crate::fit::LassoFit;
use crate::linalg::{dot, Matrix, SymmetricEigen};
use crate::scaling::{ScaledFit, ScalingConfig};

/// `-σ² + RSS/n + 2σ² df/n`
#[inline]
pub fn sure_from_parts(rss: f64, df: f64, n: usize, sigma2: f64) -> f64 {
    let n = n as f64;
    -sigma2 + rss / n + 2.0 * sigma2 * df / n
}

/// SURE of the LASSO fit: `-σ² + ||y - μ̂||²/n + 2σ² k̂/n`.
pub fn sure_lasso(fit: &LassoFit, y: &[f64], sigma2: f64) -> f64 {
    sure_from_parts(fit.rss(y), fit.k_active as f64, y.len(), sigma2)
}

/// SURE of the scaled fit: `-σ² + ||y - α̂μ̂||²/n + 2σ²(d̂₁ + d̂₂)/n`.
pub fn sure_lasso_scaled(scaled: &ScaledFit, y: &[f64], sigma2: f64) -> Result<f64> {
    check_len(scaled.mu_scaled.len(), y.len())?;
    if scaled.base.touches_transition() {
        return Err(Error::AtTransitionPoint {
            lambda: scaled.base.lambda,
            transition: scaled.base.lambda,
        });
    }
    Ok(sure_from_parts(scaled.rss(y), scaled.df(), y.len(), sigma2))
}

/// Criterion values at one candidate λ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SureReport {
    pub lambda: f64,
    pub rss_plain: f64,
    pub rss_scaled: f64,
    pub k_active: usize,
    pub alpha_hat: f64,
    pub d1: f64,
    pub d2: f64,
    pub sure_plain: f64,
    pub sure_scaled: f64,
    pub sigma2_used: f64,
}

impl SureReport {
    pub fn new(fit: &LassoFit, y: &[f64], cfg: ScalingConfig, sigma2: f64) -> Result<Self> {
        let scaled = ScaledFit::new(fit.clone(), y, cfg)?;
        Self::from_scaled(&scaled, y, sigma2)
    }

    pub fn from_scaled(scaled: &ScaledFit, y: &[f64], sigma2: f64) -> Result<Self> {
        let fit = &scaled.base;
        Ok(Self {
            lambda: fit.lambda,
            rss_plain: fit.rss(y),
            rss_scaled: scaled.rss(y),
            k_active: fit.k_active,
            alpha_hat: scaled.alpha_hat,
            d1: scaled.d1,
            d2: scaled.d2,
            sure_plain: sure_lasso(fit, y, sigma2),
            sure_scaled: sure_lasso_scaled(scaled, y, sigma2)?,
            sigma2_used: sigma2,
        })
    }

    pub fn value(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::Plain => self.sure_plain,
            Criterion::Scaled => self.sure_scaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Criterion {
    Plain,
    Scaled,
}

/// Index and λ of the report minimizing the criterion. Ties go to the
/// larger λ (the sparser model).
pub fn select_lambda(reports: &[SureReport], criterion: Criterion) -> Result<(f64, usize)> {
    let mut best: Option<usize> = None;
    for (i, r) in reports.iter().enumerate() {
        let v = r.value(criterion);
        if v.is_nan() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let bv = reports[b].value(criterion);
                if v < bv || (v == bv && r.lambda > reports[b].lambda) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.map(|i| (reports[i].lambda, i))
        .ok_or(Error::EmptyCandidateSet)
}

/// `σ̂² = y'(I - H_γ)² y / trace[(I - H_γ)²]` with `H_γ = X(X'X + γI)^{-1}X'`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseEstimate {
    pub sigma2: f64,
    pub gamma: f64,
}

/// Ridge hat matrix of a fixed design, reusable across responses.
#[derive(Debug, Clone)]
pub struct NoiseEstimator {
    x: Matrix,
    /// eigenvectors of X'X
    vectors: Matrix,
    /// `1 / (e_i + γ)`
    inv: Vec<f64>,
    trace: f64,
    gamma: f64,
}

impl NoiseEstimator {
    pub fn new(design: &DesignMatrix, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let eig = SymmetricEigen::new(design.gram());
        let mut trace = design.n() as f64;
        let mut inv = Vec::with_capacity(eig.values.len());
        for &e in &eig.values {
            let e = e.max(0.0);
            let h = e / (e + gamma);
            trace += h * h - 2.0 * h;
            inv.push(1.0 / (e + gamma));
        }
        Ok(Self {
            x: design.values().clone(),
            vectors: eig.vectors,
            inv,
            trace,
            gamma,
        })
    }

    /// `(I - H_γ) y`
    pub fn residual(&self, y: &[f64]) -> Vec<f64> {
        let xty = self.x.tr_mul_vec(y);
        let mut coef = alloc::vec![0.0; xty.len()];
        for k in 0..self.inv.len() {
            let v = self.vectors.col(k);
            let w = dot(v, &xty) * self.inv[k];
            crate::linalg::axpy(w, v, &mut coef);
        }
        let fitted = self.x.mul_vec(&coef);
        crate::linalg::sub(y, &fitted)
    }

    /// `trace[(I - H_γ)²]`
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn estimate(&self, y: &[f64]) -> Result<NoiseEstimate> {
        check_len(self.x.nrows(), y.len())?;
        let r = self.residual(y);
        Ok(NoiseEstimate {
            sigma2: (dot(&r, &r) / self.trace).max(0.0),
            gamma: self.gamma,
        })
    }
}

pub fn noise_variance_ce(design: &DesignMatrix, y: &[f64], gamma: f64) -> Result<NoiseEstimate> {
    NoiseEstimator::new(design, gamma)?.estimate(y)
}
