//! Cyclic coordinate descent, kept as an independent second solver.

use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::error::{check_len, Error, Result};
use crate::fit::{kkt_check, LassoFit};
use crate::linalg::{axpy, dot};

pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Proximal operator of `t |.|`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn coordinate_descent(
    design: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
) -> Result<LassoFit> {
    coordinate_descent_with(design, y, lambda, tol, DEFAULT_MAX_SWEEPS)
}

/// Sweeps until the largest coefficient change in a sweep is below `tol`
/// and the KKT conditions hold to `10 tol`.
pub fn coordinate_descent_with(
    design: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoFit> {
    check_len(design.n(), y.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(alloc::format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let m = design.m();
    let norms: Vec<f64> = (0..m).map(|j| design.gram()[(j, j)]).collect();
    let mut beta = alloc::vec![0.0; m];
    let mut resid = y.to_vec();

    for sweep in 1..=max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..m {
            let col = design.col(j);
            let old = beta[j];
            let z = dot(col, &resid) + norms[j] * old;
            let new = soft_threshold(z, lambda) / norms[j];
            if new != old {
                axpy(old - new, col, &mut resid);
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change < tol {
            let fit = LassoFit::from_coefficients(design, lambda, &beta);
            if kkt_check(&fit, design, y, 10.0 * tol).passed() {
                return Ok(fit);
            }
            // the running residual drifts; resync before continuing
            resid = y.iter().zip(&fit.mu).map(|(v, m)| v - m).collect();
            if sweep == max_sweeps {
                break;
            }
        }
    }
    Err(Error::MaxIterationsExceeded { sweeps: max_sweeps })
}
