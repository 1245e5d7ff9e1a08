//! Parallel Monte-Carlo driver.
//!
//! Each trial draws its noise from a stream keyed by `(seed, trial_index)`
//! and results are merged in trial order, so reports do not depend on the
//! number of worker threads.

use lasso_s_core::sim::{
    alpha_opt_from_samples, risk_gap_from_samples, FixedLambdaSample, MeanSe, RiskGap,
    TrialFailure, TrialOutcome,
};
use lasso_s_core::{Error as CoreError, SimConfig, SimContext, TrialReport};
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "LASSO_S_THREADS";

/// Explicit value, else `LASSO_S_THREADS`, else the number of available cores.
pub fn thread_count(explicit: Option<usize>) -> AppResult<usize> {
    if let Some(t) = explicit {
        if t == 0 {
            return Err(AppError::Config("thread count must be positive".into()));
        }
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| {
                AppError::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> AppResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads)?)
        .build()
        .map_err(|e| AppError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// More than 1% failed trials aborts the run.
pub fn check_failure_budget(failed: usize, trials: usize) -> AppResult<()> {
    if failed * 100 > trials {
        Err(AppError::FailureBudgetExceeded { failed, trials })
    } else {
        Ok(())
    }
}

fn map_trials<T: Send>(
    ctx: &SimContext,
    threads: Option<usize>,
    f: impl Fn(&SimContext, u64) -> Result<T, CoreError> + Sync,
) -> AppResult<(Vec<T>, Vec<TrialFailure>)> {
    let trials = ctx.config.trials as u64;
    let results: Vec<Result<T, CoreError>> = in_pool(threads, || {
        (0..trials).into_par_iter().map(|t| f(ctx, t)).collect()
    })?;
    let mut ok = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (trial, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failures.push(TrialFailure {
                trial: trial as u64,
                message: e.to_string(),
            }),
        }
    }
    check_failure_budget(failures.len(), ctx.config.trials)?;
    Ok((ok, failures))
}

pub fn run_trials(config: &SimConfig, threads: Option<usize>) -> AppResult<TrialReport> {
    let ctx = SimContext::new(config.clone())?;
    run_trials_in(&ctx, threads)
}

pub fn run_trials_in(ctx: &SimContext, threads: Option<usize>) -> AppResult<TrialReport> {
    let (outcomes, failures): (Vec<TrialOutcome>, _) =
        map_trials(ctx, threads, |c, t| c.run_trial(t))?;
    Ok(TrialReport::aggregate(
        ctx.config.clone(),
        &outcomes,
        failures,
    ))
}

/// Per-trial moments at each λ; `result[i][t]` belongs to `lambdas[i]`.
pub fn fixed_lambda_samples(
    ctx: &SimContext,
    lambdas: &[f64],
    threads: Option<usize>,
) -> AppResult<Vec<Vec<FixedLambdaSample>>> {
    let (per_trial, _) = map_trials(ctx, threads, |c, t| c.fixed_lambda_samples(t, lambdas))?;
    Ok((0..lambdas.len())
        .map(|i| per_trial.iter().map(|row| row[i]).collect())
        .collect())
}

/// Monte-Carlo plug-in of `(E μ̂'y - σ² E k̂) / E||μ̂||²` at fixed λ.
pub fn estimate_alpha_opt(
    config: &SimConfig,
    lambda: f64,
    threads: Option<usize>,
) -> AppResult<f64> {
    let ctx = SimContext::new(config.clone())?;
    let samples = fixed_lambda_samples(&ctx, &[lambda], threads)?;
    Ok(alpha_opt_from_samples(&samples[0], config.sigma2)?)
}

/// Both sides of the optimal-scaling risk gap at fixed λ.
pub fn risk_gap_oracle(
    config: &SimConfig,
    lambda: f64,
    threads: Option<usize>,
) -> AppResult<RiskGap> {
    let ctx = SimContext::new(config.clone())?;
    let samples = fixed_lambda_samples(&ctx, &[lambda], threads)?;
    Ok(risk_gap_from_samples(&samples[0], config.sigma2, config.n)?)
}

/// Mean and standard error of `α̂ - 1` at each λ.
pub fn mean_expansion(
    config: &SimConfig,
    lambdas: &[f64],
    threads: Option<usize>,
) -> AppResult<Vec<MeanSe>> {
    let ctx = SimContext::new(config.clone())?;
    let samples = fixed_lambda_samples(&ctx, lambdas, threads)?;
    Ok(samples
        .iter()
        .map(|s| MeanSe::of(s.iter().map(|x| x.alpha - 1.0)))
        .collect())
}
