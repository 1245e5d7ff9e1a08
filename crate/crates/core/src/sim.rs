//! Gaussian-basis synthetic experiments.
//!
//! Inputs `u_i` are equidistant on `[-5, 5]`, basis centers are
//! `ξ_j = u_{(n/m) j}` and column `j` of the raw design is
//! `exp{-(u_i - ξ_j)² / (2τ)}`. The response is
//! `y = Σ_{k in K*} β*_k g_τ(u, ξ_k) + ε` with `ε ~ N(0, σ² I)`.
//!
//! Everything in this module is deterministic given the configuration and
//! the trial index; the parallel driver lives in the std companion crate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::design::{standardize_design_with, DesignMatrix, StandardizeOptions};
use crate::error::{check_len, Error, Result};
use crate::fit::LassoFit;
use crate::linalg::{dot, Matrix};
use crate::path::{knot_fits, lars_lasso_path_with, solve_at, LarsOptions, LassoPath};
use crate::risk::{select_lambda, sure_from_parts, Criterion, NoiseEstimator, SureReport};
use crate::scaling::{GramSpectrum, ScaledFit, ScalingConfig};

pub const PATH_STEP_FACTOR: usize = 10;

/// Which λ values each trial is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LambdaMode {
    /// Every transition point of the trial's own LARS-LASSO path after `λ_0`.
    PathSteps,
    /// `count` log-spaced values in `[min, max]`. With `per_sample` the
    /// values are multiplied by `n`, i.e. they are given for the cost
    /// `(1/2n)||y - Xb||² + λ||b||₁`.
    LogGrid {
        min: f64,
        max: f64,
        count: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        per_sample: bool,
    },
}

impl LambdaMode {
    /// Grid values in the internal convention; `None` for path steps.
    pub fn grid(&self, n: usize) -> Option<Vec<f64>> {
        match *self {
            LambdaMode::PathSteps => None,
            LambdaMode::LogGrid {
                min,
                max,
                count,
                per_sample,
            } => {
                let factor = if per_sample { n as f64 } else { 1.0 };
                let (lo, hi) = (libm::log(min), libm::log(max));
                let pts = (0..count)
                    .map(|i| {
                        let t = if count == 1 {
                            0.0
                        } else {
                            i as f64 / (count - 1) as f64
                        };
                        factor * libm::exp(hi + t * (lo - hi))
                    })
                    .collect();
                Some(pts)
            }
        }
    }
}

/// Full description of a synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    /// 1-based basis indices with nonzero true coefficient.
    pub k_star: Vec<usize>,
    pub beta_star: Vec<f64>,
    pub sigma2: f64,
    /// Defaults to `1/n`.
    pub delta: Option<f64>,
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    pub lambda_mode: LambdaMode,
    /// Prepend the all-ones column (penalized like any other coefficient).
    pub intercept: bool,
    /// With `false`, α̂ is forced to 1 and the scaled statistics equal the plain ones.
    pub scaling: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            m: 50,
            tau: 0.1,
            k_star: alloc::vec![5, 18, 31, 45],
            beta_star: alloc::vec![1.0, -2.0, 2.0, -1.0],
            sigma2: 1.0,
            delta: None,
            gamma: 1e-6,
            trials: 200,
            seed: 20_170_101,
            lambda_mode: LambdaMode::PathSteps,
            intercept: true,
            scaling: true,
        }
    }
}

impl SimConfig {
    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(1.0 / self.n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.m == 0 || self.n < 2 {
            return bad("need n >= 2 and m >= 1".to_string());
        }
        if !self.n.is_multiple_of(self.m) {
            return Err(Error::IndivisibleGrid {
                n: self.n,
                m: self.m,
            });
        }
        if self.m + usize::from(self.intercept) > self.n {
            return bad(alloc::format!(
                "m = {} too large for n = {}",
                self.m,
                self.n
            ));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad(alloc::format!("tau must be positive, got {}", self.tau));
        }
        if self.k_star.len() != self.beta_star.len() {
            return bad("k_star and beta_star must have equal length".to_string());
        }
        if let Some(&k) = self.k_star.iter().find(|&&k| k == 0 || k > self.m) {
            return bad(alloc::format!("k_star entry {k} outside 1..={}", self.m));
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return bad(alloc::format!("sigma2 must be >= 0, got {}", self.sigma2));
        }
        if !(self.delta() > 0.0) || !self.delta().is_finite() {
            return bad(alloc::format!(
                "delta must be positive, got {}",
                self.delta()
            ));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return bad(alloc::format!("gamma must be positive, got {}", self.gamma));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".to_string());
        }
        if let LambdaMode::LogGrid {
            min, max, count, ..
        } = self.lambda_mode
        {
            if !(min > 0.0 && max >= min && max.is_finite()) || count == 0 {
                return bad("log grid needs 0 < min <= max and count >= 1".to_string());
            }
        }
        Ok(())
    }
}

/// Equidistant grid of `n` points on `[-5, 5]`.
pub fn input_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -5.0 + 10.0 * i as f64 / (n - 1) as f64)
        .collect()
}

/// `exp{-(u - ξ)² / (2τ)}`
#[inline]
pub fn gaussian_basis(u: f64, xi: f64, tau: f64) -> f64 {
    libm::exp(-(u - xi) * (u - xi) / (2.0 * tau))
}

/// Basis centers `ξ_j = u_{(n/m) j}`, j = 1..m.
pub fn basis_centers(n: usize, m: usize) -> Result<Vec<f64>> {
    if m == 0 || n < 2 || !n.is_multiple_of(m) {
        return Err(Error::IndivisibleGrid { n, m });
    }
    let u = input_grid(n);
    let step = n / m;
    Ok((1..=m).map(|j| u[step * j - 1]).collect())
}

/// Raw n × m Gaussian-basis design.
pub fn gaussian_design(n: usize, m: usize, tau: f64) -> Result<Matrix> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(alloc::format!(
            "tau must be positive, got {tau}"
        )));
    }
    let u = input_grid(n);
    let xi = basis_centers(n, m)?;
    Ok(Matrix::from_fn(n, m, |i, j| {
        gaussian_basis(u[i], xi[j], tau)
    }))
}

/// `y = mu + σ ε` with the noise stream keyed by `(seed, trial_index)`.
pub fn generate_response(mu_true: &[f64], sigma2: f64, seed: u64, trial_index: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    let sigma = libm::sqrt(sigma2);
    mu_true
        .iter()
        .map(|&m| {
            let z: f64 = StandardNormal.sample(&mut rng);
            m + sigma * z
        })
        .collect()
}

/// Design, noiseless target and cached helpers shared by all trials.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub config: SimConfig,
    pub raw: Matrix,
    pub design: DesignMatrix,
    pub mu_true: Vec<f64>,
    pub noise: NoiseEstimator,
    pub scaling: ScalingConfig,
}

impl SimContext {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let raw = gaussian_design(config.n, config.m, config.tau)?;
        // strongly overlapping bases (large τ) give a numerically singular
        // Gram matrix; the path then skips collinear columns
        let design = standardize_design_with(
            &raw,
            StandardizeOptions {
                add_intercept: config.intercept,
                require_full_rank: false,
            },
        )?;
        let mut mu_true = alloc::vec![0.0; config.n];
        for (&k, &b) in config.k_star.iter().zip(&config.beta_star) {
            crate::linalg::axpy(b, raw.col(k - 1), &mut mu_true);
        }
        let noise = NoiseEstimator::new(&design, config.gamma)?;
        let scaling = ScalingConfig::new(config.delta())?;
        Ok(Self {
            config,
            raw,
            design,
            mu_true,
            noise,
            scaling,
        })
    }

    pub fn response(&self, trial_index: u64) -> Vec<f64> {
        generate_response(
            &self.mu_true,
            self.config.sigma2,
            self.config.seed,
            trial_index,
        )
    }

    /// The Gaussian-basis paths are long (many drop and re-entry events),
    /// so the step cap here is `PATH_STEP_FACTOR · m` instead of `3m`.
    pub fn path(&self, y: &[f64]) -> Result<LassoPath> {
        lars_lasso_path_with(
            &self.design,
            y,
            LarsOptions {
                skip_collinear: true,
                max_steps: Some(PATH_STEP_FACTOR * self.design.m()),
            },
        )
    }

    pub fn spectrum(&self) -> GramSpectrum {
        GramSpectrum::of(&self.design)
    }

    fn scaled(&self, fit: LassoFit, y: &[f64]) -> Result<ScaledFit> {
        if self.config.scaling {
            ScaledFit::new(fit, y, self.scaling)
        } else {
            Ok(ScaledFit::with_alpha(fit, 1.0, self.scaling))
        }
    }

    /// Evaluate every candidate λ of one trial.
    pub fn run_trial(&self, trial_index: u64) -> Result<TrialOutcome> {
        let y = self.response(trial_index);
        let path = self.path(&y)?;
        let sigma2_ce = self.noise.estimate(&y)?.sigma2;
        let sigma2 = self.config.sigma2;

        let fits: Vec<LassoFit> = match self.config.lambda_mode.grid(self.config.n) {
            None => knot_fits(&path, &self.design, &y)?,
            Some(grid) => grid
                .iter()
                .map(|&l| solve_at(&path, &self.design, &y, l))
                .collect::<Result<_>>()?,
        };

        let mut steps = Vec::with_capacity(fits.len());
        let mut reports = Vec::with_capacity(fits.len());
        for fit in fits {
            let scaled = self.scaled(fit, &y)?;
            let report = SureReport::from_scaled(&scaled, &y, sigma2_ce)?;
            let n = self.config.n;
            steps.push(StepSample {
                lambda: report.lambda,
                k_active: report.k_active,
                alpha: scaled.alpha_hat,
                risk_plain: actual_risk(&scaled.base.mu, &self.mu_true)?,
                risk_scaled: actual_risk(&scaled.mu_scaled, &self.mu_true)?,
                sure_plain: report.sure_plain,
                sure_scaled: report.sure_scaled,
                sure_plain_true: sure_from_parts(
                    report.rss_plain,
                    report.k_active as f64,
                    n,
                    sigma2,
                ),
                sure_scaled_true: sure_from_parts(
                    report.rss_scaled,
                    report.d1 + report.d2,
                    n,
                    sigma2,
                ),
            });
            reports.push(report);
        }
        let pick = |criterion| -> Result<Selection> {
            let (lambda, step) = select_lambda(&reports, criterion)?;
            Ok(Selection {
                step,
                lambda,
                k_active: steps[step].k_active,
                risk: match criterion {
                    Criterion::Plain => steps[step].risk_plain,
                    Criterion::Scaled => steps[step].risk_scaled,
                },
            })
        };
        Ok(TrialOutcome {
            trial: trial_index,
            sigma2_ce,
            plain: pick(Criterion::Plain)?,
            scaled: pick(Criterion::Scaled)?,
            steps,
        })
    }

    /// Moments of one trial at each of the given λ values, sharing one path.
    pub fn fixed_lambda_samples(
        &self,
        trial_index: u64,
        lambdas: &[f64],
    ) -> Result<Vec<FixedLambdaSample>> {
        let y = self.response(trial_index);
        let path = self.path(&y)?;
        let sigma2_ce = self.noise.estimate(&y)?.sigma2;
        lambdas
            .iter()
            .map(|&lambda| {
                let fit = solve_at(&path, &self.design, &y, lambda)?;
                let scaled = self.scaled(fit, &y)?;
                let fit = &scaled.base;
                Ok(FixedLambdaSample {
                    mu_dot_y: dot(&fit.mu, &y),
                    mu_norm2: fit.mu_norm2(),
                    mu_dot_target: dot(&fit.mu, &self.mu_true),
                    k_active: fit.k_active,
                    alpha: scaled.alpha_hat,
                    sigma2_ce,
                })
            })
            .collect()
    }
}

/// `(1/n)||μ̂ - μ||²`
pub fn actual_risk(mu_hat: &[f64], mu_true: &[f64]) -> Result<f64> {
    check_len(mu_true.len(), mu_hat.len())?;
    let ss: f64 = mu_hat
        .iter()
        .zip(mu_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(ss / mu_true.len() as f64)
}

/// Per-λ values of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepSample {
    pub lambda: f64,
    pub k_active: usize,
    pub alpha: f64,
    pub risk_plain: f64,
    pub risk_scaled: f64,
    /// with σ̂²_CE
    pub sure_plain: f64,
    pub sure_scaled: f64,
    /// with the true σ²
    pub sure_plain_true: f64,
    pub sure_scaled_true: f64,
}

/// Model picked by minimizing a criterion (with σ̂²_CE) over a trial's candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Selection {
    pub step: usize,
    pub lambda: f64,
    pub k_active: usize,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialOutcome {
    pub trial: u64,
    pub sigma2_ce: f64,
    pub steps: Vec<StepSample>,
    pub plain: Selection,
    pub scaled: Selection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedLambdaSample {
    pub mu_dot_y: f64,
    pub mu_norm2: f64,
    pub mu_dot_target: f64,
    pub k_active: usize,
    pub alpha: f64,
    pub sigma2_ce: f64,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0 };
        }
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            se: libm::sqrt(var / n as f64),
        }
    }
}

/// Aggregated statistics at one path step (or grid point).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepSummary {
    pub step: usize,
    pub trials: usize,
    pub mean_lambda: f64,
    pub mean_k: f64,
    pub alpha: MeanSe,
    pub risk_plain: MeanSe,
    pub risk_scaled: MeanSe,
    pub sure_plain: MeanSe,
    pub sure_scaled: MeanSe,
    pub sure_plain_true: MeanSe,
    pub sure_scaled_true: MeanSe,
    /// paired differences SURE − risk
    pub diff_plain: MeanSe,
    pub diff_scaled: MeanSe,
    pub diff_plain_true: MeanSe,
    pub diff_scaled_true: MeanSe,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialSelection {
    pub trial: u64,
    pub plain: Selection,
    pub scaled: Selection,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialFailure {
    pub trial: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialReport {
    pub config: SimConfig,
    pub completed: usize,
    pub sigma2_ce: MeanSe,
    pub steps: Vec<StepSummary>,
    pub selections: Vec<TrialSelection>,
    pub failures: Vec<TrialFailure>,
}

impl TrialReport {
    /// Aggregate outcomes (in trial order) by step index. Only steps reached
    /// by every successful trial are reported.
    pub fn aggregate(
        config: SimConfig,
        outcomes: &[TrialOutcome],
        failures: Vec<TrialFailure>,
    ) -> Self {
        let depth = outcomes.iter().map(|o| o.steps.len()).min().unwrap_or(0);
        let steps = (0..depth)
            .map(|s| {
                let col =
                    |f: fn(&StepSample) -> f64| MeanSe::of(outcomes.iter().map(|o| f(&o.steps[s])));
                StepSummary {
                    step: s,
                    trials: outcomes.len(),
                    mean_lambda: col(|x| x.lambda).mean,
                    mean_k: col(|x| x.k_active as f64).mean,
                    alpha: col(|x| x.alpha),
                    risk_plain: col(|x| x.risk_plain),
                    risk_scaled: col(|x| x.risk_scaled),
                    sure_plain: col(|x| x.sure_plain),
                    sure_scaled: col(|x| x.sure_scaled),
                    sure_plain_true: col(|x| x.sure_plain_true),
                    sure_scaled_true: col(|x| x.sure_scaled_true),
                    diff_plain: col(|x| x.sure_plain - x.risk_plain),
                    diff_scaled: col(|x| x.sure_scaled - x.risk_scaled),
                    diff_plain_true: col(|x| x.sure_plain_true - x.risk_plain),
                    diff_scaled_true: col(|x| x.sure_scaled_true - x.risk_scaled),
                }
            })
            .collect();
        Self {
            config,
            completed: outcomes.len(),
            sigma2_ce: MeanSe::of(outcomes.iter().map(|o| o.sigma2_ce)),
            steps,
            selections: outcomes
                .iter()
                .map(|o| TrialSelection {
                    trial: o.trial,
                    plain: o.plain,
                    scaled: o.scaled,
                })
                .collect(),
            failures,
        }
    }

    /// Step with the smallest mean risk for the given estimator.
    pub fn risk_minimizing_step(&self, criterion: Criterion) -> Option<&StepSummary> {
        let key = |s: &StepSummary| match criterion {
            Criterion::Plain => s.risk_plain.mean,
            Criterion::Scaled => s.risk_scaled.mean,
        };
        self.steps.iter().min_by(|a, b| key(a).total_cmp(&key(b)))
    }
}

/// `(E μ̂'y - σ² E k̂) / E||μ̂||²` from Monte-Carlo moments.
pub fn alpha_opt_from_samples(samples: &[FixedLambdaSample], sigma2: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::DegenerateDenominator);
    }
    let t = samples.len() as f64;
    let mean = |f: fn(&FixedLambdaSample) -> f64| samples.iter().map(f).sum::<f64>() / t;
    let den = mean(|s| s.mu_norm2);
    if den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((mean(|s| s.mu_dot_y) - sigma2 * mean(|s| s.k_active as f64)) / den)
}

/// Both sides of `R(λ,1) - R(λ,α_opt) = (1/n)(α_opt - 1)² E||μ̂||²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskGap {
    pub alpha_opt: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs - rhs`.
    pub se: f64,
}

/// The difference `lhs - rhs` equals `(2/n)(1 - α) mean(μ̂'ε - σ² k̂)`, a
/// Stein-identity residual with mean zero, so its standard error is taken
/// from the per-trial spread of `μ̂'ε - σ² k̂`.
pub fn risk_gap_from_samples(
    samples: &[FixedLambdaSample],
    sigma2: f64,
    n: usize,
) -> Result<RiskGap> {
    let alpha = alpha_opt_from_samples(samples, sigma2)?;
    let nf = n as f64;
    let lhs = MeanSe::of(samples.iter().map(|s| {
        ((1.0 - alpha * alpha) * s.mu_norm2 - 2.0 * (1.0 - alpha) * s.mu_dot_target) / nf
    }))
    .mean;
    let e_mu2 = MeanSe::of(samples.iter().map(|s| s.mu_norm2)).mean;
    let rhs = (alpha - 1.0) * (alpha - 1.0) * e_mu2 / nf;
    let z = MeanSe::of(
        samples
            .iter()
            .map(|s| s.mu_dot_y - s.mu_dot_target - sigma2 * s.k_active as f64),
    );
    Ok(RiskGap {
        alpha_opt: alpha,
        lhs,
        rhs,
        se: 2.0 / nf * (1.0 - alpha).abs() * z.se,
    })
}
