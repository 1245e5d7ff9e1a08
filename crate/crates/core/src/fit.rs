//! Single-λ LASSO solutions and the quantities derived from them.

use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm1, Cholesky, Matrix};

/// LASSO solution at one value of λ.
///
/// The solver minimizes `(1/2)||y - X b||^2 + λ ||b||_1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LassoFit {
    pub lambda: f64,
    /// Active column indices, in the order the solver tracks them.
    pub active_set: Vec<usize>,
    /// Signs of `beta_active`, each `-1`, `0` or `+1`.
    pub signs: Vec<i8>,
    pub beta_active: Vec<f64>,
    pub beta_full: Vec<f64>,
    /// Fitted vector `X_B beta_active`.
    pub mu: Vec<f64>,
    pub k_active: usize,
}

impl LassoFit {
    /// Fit with empty active set.
    pub fn zero(design: &DesignMatrix, lambda: f64) -> Self {
        Self {
            lambda,
            active_set: Vec::new(),
            signs: Vec::new(),
            beta_active: Vec::new(),
            beta_full: alloc::vec![0.0; design.m()],
            mu: alloc::vec![0.0; design.n()],
            k_active: 0,
        }
    }

    /// Build from active-set coefficients; `mu` is recomputed from the design.
    pub fn from_active(
        design: &DesignMatrix,
        lambda: f64,
        active_set: Vec<usize>,
        beta_active: Vec<f64>,
    ) -> Self {
        assert_eq!(active_set.len(), beta_active.len());
        let mut beta_full = alloc::vec![0.0; design.m()];
        let mut mu = alloc::vec![0.0; design.n()];
        for (&j, &b) in active_set.iter().zip(&beta_active) {
            beta_full[j] = b;
            crate::linalg::axpy(b, design.col(j), &mut mu);
        }
        let signs = beta_active.iter().map(|&b| sign(b)).collect();
        let k_active = active_set.len();
        Self {
            lambda,
            active_set,
            signs,
            beta_active,
            beta_full,
            mu,
            k_active,
        }
    }

    /// Build from a full coefficient vector; the active set is its support.
    pub fn from_coefficients(design: &DesignMatrix, lambda: f64, beta_full: &[f64]) -> Self {
        assert_eq!(beta_full.len(), design.m());
        let active_set: Vec<usize> = (0..beta_full.len())
            .filter(|&j| beta_full[j] != 0.0)
            .collect();
        let beta_active = active_set.iter().map(|&j| beta_full[j]).collect();
        Self::from_active(design, lambda, active_set, beta_active)
    }

    /// `||beta||_1`
    pub fn l1_norm(&self) -> f64 {
        norm1(&self.beta_active)
    }

    /// `||mu||^2`
    pub fn mu_norm2(&self) -> f64 {
        dot(&self.mu, &self.mu)
    }

    /// `||y - mu||^2`
    pub fn rss(&self, y: &[f64]) -> f64 {
        self.mu.iter().zip(y).map(|(m, v)| (v - m) * (v - m)).sum()
    }

    /// True when an active coefficient is exactly zero, which only happens
    /// when the fit sits on a transition point of the path.
    pub fn touches_transition(&self) -> bool {
        self.beta_active.contains(&0.0)
    }
}

#[inline]
pub(crate) fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Violations of the LASSO optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KktReport {
    /// `max_{j in B} |x_j'(y - mu) - λ s_j|`
    pub stationarity: f64,
    /// `max_{j not in B} (|x_j'(y - mu)| - λ)_+`
    pub subgradient_excess: f64,
    pub tol: f64,
}

impl KktReport {
    pub fn max_violation(&self) -> f64 {
        self.stationarity.max(self.subgradient_excess)
    }

    pub fn passed(&self) -> bool {
        self.stationarity <= self.tol && self.subgradient_excess <= self.tol
    }
}

/// Check `x_j'(y - mu) = λ s_j` on the active set and `|x_j'(y - mu)| <= λ` off it.
///
/// Coordinates are classified by the sign of `beta_full`, not by the fit's
/// stored sign vector, so a perturbed coefficient is always caught.
pub fn kkt_check(fit: &LassoFit, design: &DesignMatrix, y: &[f64], tol: f64) -> KktReport {
    let resid: Vec<f64> = y.iter().zip(&fit.mu).map(|(v, m)| v - m).collect();
    let mut stationarity: f64 = 0.0;
    let mut subgradient_excess: f64 = 0.0;
    for j in 0..design.m() {
        let c = dot(design.col(j), &resid);
        let b = fit.beta_full[j];
        if b != 0.0 {
            let s = if b > 0.0 { 1.0 } else { -1.0 };
            stationarity = stationarity.max((c - fit.lambda * s).abs());
        } else {
            subgradient_excess = subgradient_excess.max(c.abs() - fit.lambda);
        }
    }
    KktReport {
        stationarity,
        subgradient_excess,
        tol,
    }
}

/// Post-selection projections on the active set of a fit.
#[derive(Debug, Clone)]
pub struct HatQuantities {
    /// `q = X_B (X_B'X_B)^{-1} S`
    pub q_vec: Vec<f64>,
    /// `mu_post = H y`, the least-squares refit on the active columns.
    pub mu_post: Vec<f64>,
    /// `beta_post = (X_B'X_B)^{-1} X_B' y`
    pub beta_post: Vec<f64>,
    active_columns: Matrix,
    chol: Cholesky,
}

impl HatQuantities {
    /// `H v = X_B (X_B'X_B)^{-1} X_B' v`
    pub fn apply_hat(&self, v: &[f64]) -> Vec<f64> {
        let coef = self.chol.solve(&self.active_columns.tr_mul_vec(v));
        self.active_columns.mul_vec(&coef)
    }

    /// `trace(H)`, which equals the active-set size.
    pub fn trace(&self) -> usize {
        self.active_columns.ncols()
    }
}

pub fn hat_quantities(fit: &LassoFit, design: &DesignMatrix, y: &[f64]) -> Result<HatQuantities> {
    check_len(design.n(), y.len())?;
    if fit.k_active == 0 {
        return Err(Error::EmptyActiveSet);
    }
    let active_columns = design.values().select_columns(&fit.active_set);
    let chol = Cholesky::factor(&design.gram().principal(&fit.active_set)).map_err(|e| {
        Error::RankDeficient {
            column: fit.active_set[e.index],
        }
    })?;
    let s: Vec<f64> = fit.signs.iter().map(|&s| f64::from(s)).collect();
    let q_vec = active_columns.mul_vec(&chol.solve(&s));
    let beta_post = chol.solve(&active_columns.tr_mul_vec(y));
    let mu_post = active_columns.mul_vec(&beta_post);
    Ok(HatQuantities {
        q_vec,
        mu_post,
        beta_post,
        active_columns,
        chol,
    })
}
