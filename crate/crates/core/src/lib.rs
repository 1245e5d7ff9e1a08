//! LASSO with empirical scaling and SURE-based model selection.
//!
//! The solver works with the cost `(1/2)||y - Xb||² + λ||b||₁`, for which the
//! active-set solution is `β̂ = (X_B'X_B)^{-1}(X_B'y - λ S)`. On top of a
//! LASSO fit `μ̂` the crate computes the expansion factor
//! `α̂ = (μ̂'y + δ)/(||μ̂||² + δ)`, the scaled output `α̂ μ̂`, and the
//! unbiased risk estimates of both the plain and the scaled fit.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cd;
pub mod design;
mod error;
pub mod fit;
pub mod linalg;
pub mod path;
pub mod risk;
pub mod scaling;
pub mod sim;

pub use cd::{coordinate_descent, coordinate_descent_with, soft_threshold};
pub use design::{standardize_design, standardize_design_with, DesignMatrix, StandardizeOptions};
pub use error::{Error, Result};
pub use fit::{hat_quantities, kkt_check, HatQuantities, KktReport, LassoFit};
pub use linalg::Matrix;
pub use path::{
    knot_fits, lars_lasso_path, lars_lasso_path_with, solve_at, solve_on_active, LarsOptions,
    LassoPath, PathEvent, PathSegment,
};
pub use risk::{
    noise_variance_ce, select_lambda, sure_lasso, sure_lasso_scaled, Criterion, NoiseEstimate,
    NoiseEstimator, SureReport,
};
pub use scaling::{
    df_terms, eigen_bounds, empirical_alpha, residual_gap, scaled_output, DfTerms, GramSpectrum,
    ScaledFit, ScalingConfig,
};
pub use sim::{actual_risk, gaussian_design, SimConfig, SimContext, TrialReport};
