//! A regression problem read from a data file: design, response, intercept
//! handling and the per-λ summary emitted by the commands.

use lasso_s_core::risk::sure_from_parts;
use lasso_s_core::sim::PATH_STEP_FACTOR;
use lasso_s_core::{
    kkt_check, lars_lasso_path_with, noise_variance_ce, standardize_design, DesignMatrix,
    LarsOptions, LassoFit, LassoPath, Matrix, ScaledFit, ScalingConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::AppResult;

/// How the intercept enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InterceptMode {
    /// All-ones column penalized like any other coefficient.
    #[default]
    Penalized,
    /// Unpenalized: the response is centered and its mean added back.
    Free,
    None,
}

/// Scale on which user-facing λ values are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// cost `||y - Xb||² + λ||b||₁`
    Paper,
    /// cost `(1/2)||y - Xb||² + λ||b||₁`
    #[default]
    Half,
}

impl Convention {
    /// Multiply a λ in this convention by this to get the internal value.
    pub fn to_internal_factor(self) -> f64 {
        match self {
            Convention::Paper => 0.5,
            Convention::Half => 1.0,
        }
    }

    pub fn to_internal(self, lambda: f64) -> f64 {
        lambda * self.to_internal_factor()
    }

    pub fn from_internal(self, lambda: f64) -> f64 {
        lambda / self.to_internal_factor()
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub design: DesignMatrix,
    /// response the solver sees (centered under [`InterceptMode::Free`])
    pub y: Vec<f64>,
    pub y_raw: Vec<f64>,
    pub raw: Matrix,
    pub names: Vec<String>,
    pub mode: InterceptMode,
    /// mean added back under [`InterceptMode::Free`], else 0
    pub offset: f64,
}

/// Everything reported about one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// half convention inside the crate; commands convert it on output
    pub lambda: f64,
    pub k_active: usize,
    pub active: Vec<String>,
    pub alpha_hat: f64,
    pub d1: f64,
    pub d2: f64,
    /// degrees of freedom of the plain and scaled fits, intercept included
    pub df_plain: f64,
    pub df_scaled: f64,
    pub rss_plain: f64,
    pub rss_scaled: f64,
    pub sure_plain: f64,
    pub sure_scaled: f64,
    pub sigma2_used: f64,
    /// original-scale intercept and coefficients of `μ̂`
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// the same for `α̂ μ̂`
    pub scaled_intercept: f64,
    pub scaled_coefficients: Vec<f64>,
    pub kkt_max_violation: f64,
}

impl Problem {
    pub fn new(
        raw: Matrix,
        y: Vec<f64>,
        names: Vec<String>,
        mode: InterceptMode,
    ) -> AppResult<Self> {
        let design = standardize_design(&raw, mode == InterceptMode::Penalized)?;
        Self::with_design(design, raw, y, names, mode)
    }

    /// Predictors used as given: no centering, no scaling, no intercept.
    pub fn unstandardized(raw: Matrix, y: Vec<f64>, names: Vec<String>) -> AppResult<Self> {
        let design = DesignMatrix::from_matrix(raw.clone())?;
        Self::with_design(design, raw, y, names, InterceptMode::None)
    }

    fn with_design(
        design: DesignMatrix,
        raw: Matrix,
        y: Vec<f64>,
        names: Vec<String>,
        mode: InterceptMode,
    ) -> AppResult<Self> {
        if y.len() != raw.nrows() {
            return Err(lasso_s_core::Error::LengthMismatch {
                expected: raw.nrows(),
                found: y.len(),
            }
            .into());
        }
        let offset = match mode {
            InterceptMode::Free => y.iter().sum::<f64>() / y.len() as f64,
            _ => 0.0,
        };
        Ok(Self {
            design,
            y: y.iter().map(|v| v - offset).collect(),
            y_raw: y,
            raw,
            names,
            mode,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    fn extra_df(&self) -> f64 {
        if self.mode == InterceptMode::Free {
            1.0
        } else {
            0.0
        }
    }

    pub fn path(&self) -> AppResult<LassoPath> {
        let opts = LarsOptions {
            max_steps: Some(PATH_STEP_FACTOR * self.design.m()),
            skip_collinear: false,
        };
        Ok(lars_lasso_path_with(&self.design, &self.y, opts)?)
    }

    /// `σ̂²_CE` with an intercept column in the ridge fit unless the model has none.
    pub fn noise_variance(&self, gamma: f64) -> AppResult<f64> {
        let est = match self.mode {
            InterceptMode::None => noise_variance_ce(&self.design, &self.y_raw, gamma)?,
            _ => noise_variance_ce(&standardize_design(&self.raw, true)?, &self.y_raw, gamma)?,
        };
        Ok(est.sigma2)
    }

    pub fn column_name(&self, j: usize) -> String {
        match self.design.raw_index(j) {
            Some(r) => self.names[r].clone(),
            None => "(intercept)".to_string(),
        }
    }

    pub fn evaluate(&self, fit: LassoFit, delta: f64, sigma2: f64) -> AppResult<Evaluation> {
        let kkt = kkt_check(&fit, &self.design, &self.y, 0.0).max_violation();
        let scaled = ScaledFit::new(fit, &self.y, ScalingConfig::new(delta)?)?;
        let fit = &scaled.base;
        let n = self.n();
        let df_plain = fit.k_active as f64 + self.extra_df();
        let df_scaled = scaled.df() + self.extra_df();
        let rss_plain = fit.rss(&self.y);
        let rss_scaled = scaled.rss(&self.y);
        let (off, coefs) = self.design.original_coefficients(&fit.beta_full);
        let a = scaled.alpha_hat;
        Ok(Evaluation {
            lambda: fit.lambda,
            k_active: fit.k_active,
            active: fit
                .active_set
                .iter()
                .map(|&j| self.column_name(j))
                .collect(),
            alpha_hat: a,
            d1: scaled.d1,
            d2: scaled.d2,
            df_plain,
            df_scaled,
            rss_plain,
            rss_scaled,
            sure_plain: sure_from_parts(rss_plain, df_plain, n, sigma2),
            sure_scaled: sure_from_parts(rss_scaled, df_scaled, n, sigma2),
            sigma2_used: sigma2,
            intercept: self.offset + off,
            scaled_intercept: self.offset + a * off,
            scaled_coefficients: coefs.iter().map(|c| a * c).collect(),
            coefficients: coefs,
            kkt_max_violation: kkt,
        })
    }
}

impl Evaluation {
    /// Fitted values of `μ̂` (or `α̂ μ̂`) on raw predictor rows.
    pub fn predict(&self, raw: &Matrix, scaled: bool) -> Vec<f64> {
        let (b0, b) = if scaled {
            (self.scaled_intercept, &self.scaled_coefficients)
        } else {
            (self.intercept, &self.coefficients)
        };
        raw.mul_vec(b).into_iter().map(|v| v + b0).collect()
    }
}
