//! Empirical scaling of a LASSO fit.
//!
//! The scaled estimator is `α̂ μ̂` with
//! `α̂ = (μ̂'y + δ) / (||μ̂||² + δ)`. Off transition points
//! `μ̂'y = ||μ̂||² + λ||β̂||₁`, so `α̂ = 1 + λ||β̂||₁ / (||μ̂||² + δ) >= 1`.

use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::error::{check_len, Error, Result};
use crate::fit::LassoFit;
use crate::linalg::{dot, SymmetricEigen};

/// Stabilizing constant δ > 0 in the denominator of α̂.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingConfig {
    pub delta: f64,
}

impl ScalingConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(Self { delta })
        } else {
            Err(Error::InvalidInput(alloc::format!(
                "delta must be positive, got {delta}"
            )))
        }
    }

    /// `δ = 1/n`
    pub fn for_sample_size(n: usize) -> Self {
        Self {
            delta: 1.0 / n as f64,
        }
    }
}

/// `(μ̂'y + δ) / (||μ̂||² + δ)`
pub fn empirical_alpha(fit: &LassoFit, y: &[f64], cfg: ScalingConfig) -> f64 {
    (dot(&fit.mu, y) + cfg.delta) / (fit.mu_norm2() + cfg.delta)
}

/// `1 + λ||β̂||₁ / (||μ̂||² + δ)`, valid off transition points.
pub fn empirical_alpha_from_penalty(fit: &LassoFit, cfg: ScalingConfig) -> f64 {
    1.0 + fit.lambda * fit.l1_norm() / (fit.mu_norm2() + cfg.delta)
}

/// `α μ̂`
pub fn scaled_output(fit: &LassoFit, alpha: f64) -> Vec<f64> {
    fit.mu.iter().map(|m| alpha * m).collect()
}

fn require_off_transition(fit: &LassoFit) -> Result<()> {
    if fit.touches_transition() {
        Err(Error::AtTransitionPoint {
            lambda: fit.lambda,
            transition: fit.lambda,
        })
    } else {
        Ok(())
    }
}

/// `d̂(λ) = (1 - α̂)² (||μ̂||² + 2δ)`, the drop in residual sum of squares
/// obtained by scaling.
pub fn residual_gap(fit: &LassoFit, y: &[f64], cfg: ScalingConfig) -> Result<f64> {
    check_len(fit.mu.len(), y.len())?;
    require_off_transition(fit)?;
    let alpha = empirical_alpha(fit, y, cfg);
    Ok(gap_for(alpha, fit.mu_norm2(), cfg.delta))
}

#[inline]
fn gap_for(alpha: f64, mu2: f64, delta: f64) -> f64 {
    (1.0 - alpha) * (1.0 - alpha) * (mu2 + 2.0 * delta)
}

/// Degrees-of-freedom terms of the scaled fit: its divergence in `y` is
/// `d1 + d2` with `d1 = (1 - α̂)(||μ̂||² - δ)/(||μ̂||² + δ)` and `d2 = α̂ k̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DfTerms {
    pub d1: f64,
    pub d2: f64,
}

impl DfTerms {
    pub fn total(&self) -> f64 {
        self.d1 + self.d2
    }
}

pub fn df_terms(fit: &LassoFit, y: &[f64], cfg: ScalingConfig) -> Result<DfTerms> {
    check_len(fit.mu.len(), y.len())?;
    require_off_transition(fit)?;
    let alpha = empirical_alpha(fit, y, cfg);
    Ok(df_for(alpha, fit.mu_norm2(), fit.k_active, cfg.delta))
}

#[inline]
fn df_for(alpha: f64, mu2: f64, k: usize, delta: f64) -> DfTerms {
    DfTerms {
        d1: (1.0 - alpha) * (mu2 - delta) / (mu2 + delta),
        d2: alpha * k as f64,
    }
}

/// A LASSO fit together with its scaling and degrees-of-freedom terms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaledFit {
    pub base: LassoFit,
    pub alpha_hat: f64,
    pub mu_scaled: Vec<f64>,
    pub d1: f64,
    pub d2: f64,
    pub residual_gap: f64,
    pub delta: f64,
}

impl ScaledFit {
    pub fn new(base: LassoFit, y: &[f64], cfg: ScalingConfig) -> Result<Self> {
        check_len(base.mu.len(), y.len())?;
        require_off_transition(&base)?;
        let alpha = empirical_alpha(&base, y, cfg);
        Ok(Self::assemble(base, alpha, cfg.delta))
    }

    /// Same bookkeeping with a caller-chosen α (α = 1 reproduces plain LASSO).
    pub fn with_alpha(base: LassoFit, alpha: f64, cfg: ScalingConfig) -> Self {
        Self::assemble(base, alpha, cfg.delta)
    }

    fn assemble(base: LassoFit, alpha: f64, delta: f64) -> Self {
        let mu2 = base.mu_norm2();
        let df = df_for(alpha, mu2, base.k_active, delta);
        Self {
            mu_scaled: scaled_output(&base, alpha),
            alpha_hat: alpha,
            d1: df.d1,
            d2: df.d2,
            residual_gap: gap_for(alpha, mu2, delta),
            delta,
            base,
        }
    }

    /// `||y - α̂ μ̂||²`
    pub fn rss(&self, y: &[f64]) -> f64 {
        self.mu_scaled
            .iter()
            .zip(y)
            .map(|(m, v)| (v - m) * (v - m))
            .sum()
    }

    pub fn df(&self) -> f64 {
        self.d1 + self.d2
    }
}

/// Extreme eigenvalues of `X'X / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramSpectrum {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
    pub m: usize,
}

impl GramSpectrum {
    pub fn of(design: &DesignMatrix) -> Self {
        let n = design.n();
        let mut g = design.gram().clone();
        let inv_n = 1.0 / n as f64;
        for j in 0..g.ncols() {
            for v in g.col_mut(j) {
                *v *= inv_n;
            }
        }
        let eig = SymmetricEigen::new(&g);
        Self {
            rho_min: eig.min(),
            rho_max: eig.max(),
            n,
            m: design.m(),
        }
    }

    /// `(λ²/(n ρ_max), λ² m²/(n ρ_min))`
    pub fn residual_gap_bounds(&self, lambda: f64) -> (f64, f64) {
        let n = self.n as f64;
        let m = self.m as f64;
        let l2 = lambda * lambda;
        (l2 / (n * self.rho_max), l2 * m * m / (n * self.rho_min))
    }

    /// `max(1/δ, m²/ρ_min) λ / √n`, the bound on `E[α̂ - 1]`.
    pub fn expansion_bound(&self, lambda: f64, delta: f64) -> f64 {
        let m = self.m as f64;
        (1.0 / delta).max(m * m / self.rho_min) * lambda / libm::sqrt(self.n as f64)
    }
}

/// Bounds on the δ = 0 residual gap `λ²||β̂||₁²/||μ̂||²` from the extreme
/// eigenvalues of `X'X/n`.
pub fn eigen_bounds(design: &DesignMatrix, lambda: f64, fit: &LassoFit) -> Result<(f64, f64)> {
    if fit.k_active == 0 {
        return Err(Error::EmptyActiveSet);
    }
    let gram = GramSpectrum::of(design);
    if !(gram.rho_min > 0.0) {
        return Err(Error::RankDeficient { column: 0 });
    }
    Ok(gram.residual_gap_bounds(lambda))
}

/// `λ²||β̂||₁² / ||μ̂||²`, the residual gap with δ = 0.
pub fn residual_gap_unstabilized(fit: &LassoFit) -> f64 {
    let p = fit.lambda * fit.l1_norm();
    if p == 0.0 {
        return 0.0;
    }
    p * p / fit.mu_norm2()
}
