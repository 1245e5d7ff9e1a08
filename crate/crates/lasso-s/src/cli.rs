//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lasso_s_core::{knot_fits, solve_at};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};
use crate::io::{coefficients_csv, path_csv, report_csv, to_json, write_atomic, DataFile};
use crate::model::{Convention, Evaluation, InterceptMode, Problem};
use crate::runner::run_trials;

const DEFAULT_GAMMA: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "lasso-s",
    version,
    about = "LASSO with empirical scaling and SURE-based selection"
)]
#[command(after_help = "Worker threads for `simulate` are read from LASSO_S_THREADS.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the full LARS-LASSO path and write its transition points.
    Path(PathArgs),
    /// Fit at one λ and report α̂, degrees of freedom and both SURE values.
    Fit(FitArgs),
    /// Pick λ by minimizing SURE of the plain or the scaled fit.
    Select(SelectArgs),
    /// Run a synthetic Gaussian-basis experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub data: PathBuf,
    /// Response column (default: the last column)
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long, value_enum, default_value_t = InterceptMode::Penalized)]
    pub intercept: InterceptMode,
    /// Use the predictors as given, without centering or scaling (needs `--intercept none`)
    #[arg(long)]
    pub raw: bool,
    /// `paper` reads and writes λ for the cost ||y - Xb||² + λ||b||₁
    #[arg(long, value_enum, default_value_t = Convention::Half)]
    pub lambda_convention: Convention,
    /// Output stem; without it results go to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Stabilizer in α̂ (default 1/n)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Ridge parameter of the noise estimate
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Known noise variance, replacing the estimate
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub scaling: ScalingArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionArg {
    Plain,
    Scaled,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub scaling: ScalingArgs,
    #[arg(long, value_enum, default_value_t = CriterionArg::Scaled)]
    pub criterion: CriterionArg,
    /// `MIN,MAX,COUNT` log-spaced candidates instead of the path's transition points
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, count] = parts[..] else {
        return Err("expected MIN,MAX,COUNT".into());
    };
    let min: f64 = lo.parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let max: f64 = hi.parse().map_err(|e| format!("{hi:?}: {e}"))?;
    let count: usize = count.parse().map_err(|e| format!("{count:?}: {e}"))?;
    if !(min > 0.0 && max >= min && max.is_finite()) || count == 0 {
        return Err("need 0 < MIN <= MAX and COUNT >= 1".into());
    }
    Ok(Grid { min, max, count })
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.ln(), self.max.ln());
        (0..self.count)
            .map(|i| {
                let t = if self.count == 1 {
                    0.0
                } else {
                    i as f64 / (self.count - 1) as f64
                };
                (hi + t * (lo - hi)).exp()
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON run configuration (default: the built-in experiment)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// True noise variance of the generated data
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Output stem; `.csv` and `.json` are appended
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(out: Option<&Path>, suffix: &str, bytes: &[u8]) -> AppResult<()> {
    match out {
        Some(stem) => write_atomic(&with_suffix(stem, suffix), bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| AppError::io("<stdout>", e)),
    }
}

fn load(args: &DataArgs) -> AppResult<Problem> {
    let data = DataFile::read(&args.data)?;
    let (x, y, names) = data.split(args.response.as_deref())?;
    if !args.raw {
        return Problem::new(x, y, names, args.intercept);
    }
    if args.intercept != InterceptMode::None {
        return Err(AppError::Config("--raw requires --intercept none".into()));
    }
    Problem::unstandardized(x, y, names)
}

fn positive(name: &str, v: f64) -> AppResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(AppError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

impl ScalingArgs {
    fn delta(&self, n: usize) -> AppResult<f64> {
        positive("delta", self.delta.unwrap_or(1.0 / n as f64))
    }

    /// Noise variance used in SURE and, separately, the estimate.
    fn sigma2(&self, problem: &Problem) -> AppResult<(f64, f64)> {
        let est = problem.noise_variance(positive("gamma", self.gamma)?)?;
        let used = match self.sigma2 {
            Some(s) if s >= 0.0 && s.is_finite() => s,
            Some(s) => return Err(AppError::Config(format!("sigma2 must be >= 0, got {s}"))),
            None => est,
        };
        Ok((used, est))
    }
}

/// The evaluation with λ in the requested convention.
fn reported(conv: Convention, eval: &Evaluation) -> Evaluation {
    Evaluation {
        lambda: conv.from_internal(eval.lambda),
        ..eval.clone()
    }
}

#[derive(Debug, Serialize)]
struct FitOutput {
    lambda_convention: Convention,
    intercept_mode: InterceptMode,
    sigma2_ce: f64,
    fit: Evaluation,
}

#[derive(Debug, Serialize)]
struct Candidate {
    lambda: f64,
    k_active: usize,
    alpha_hat: f64,
    sure_plain: f64,
    sure_scaled: f64,
}

#[derive(Debug, Serialize)]
struct SelectOutput {
    lambda_convention: Convention,
    intercept_mode: InterceptMode,
    criterion: CriterionArg,
    sigma2_ce: f64,
    selected: Evaluation,
    candidates: Vec<Candidate>,
}

pub fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Path(a) => cmd_path(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn cmd_path(a: PathArgs) -> AppResult<()> {
    let p = load(&a.data)?;
    let path = p.path()?;
    let factor = 1.0 / a.data.lambda_convention.to_internal_factor();
    let steps = path_csv(&path, &p.design, &p.names, factor)?;
    match a.data.out.as_deref() {
        Some(stem) => {
            let mut coefs = coefficients_csv(&path, &p.design, &p.names, factor)?;
            if p.offset != 0.0 {
                coefs = shift_intercepts(&coefs, p.offset)?;
            }
            emit(Some(stem), ".path.csv", &steps)?;
            emit(Some(stem), ".coefficients.csv", &coefs)
        }
        None => emit(None, "", &steps),
    }
}

/// Add the response mean back to the intercept column of a coefficient table.
fn shift_intercepts(bytes: &[u8], offset: f64) -> AppResult<Vec<u8>> {
    let err = |e: csv::Error| AppError::Parse(e.to_string());
    let mut rdr = csv::Reader::from_reader(bytes);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(rdr.headers().map_err(err)?).map_err(err)?;
    for rec in rdr.records() {
        let rec = rec.map_err(err)?;
        let mut row: Vec<String> = rec.iter().map(str::to_owned).collect();
        let b0: f64 = row[1]
            .parse()
            .map_err(|_| AppError::Parse("bad intercept cell".into()))?;
        row[1] = crate::io::fmt_num(b0 + offset);
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| AppError::Parse(e.to_string()))
}

fn cmd_fit(a: FitArgs) -> AppResult<()> {
    let p = load(&a.data)?;
    let conv = a.data.lambda_convention;
    if !(a.lambda >= 0.0 && a.lambda.is_finite()) {
        return Err(AppError::Config(format!(
            "lambda must be >= 0, got {}",
            a.lambda
        )));
    }
    let path = p.path()?;
    let fit = solve_at(&path, &p.design, &p.y, conv.to_internal(a.lambda))?;
    let (sigma2, est) = a.scaling.sigma2(&p)?;
    let eval = p.evaluate(fit, a.scaling.delta(p.n())?, sigma2)?;
    let out = FitOutput {
        lambda_convention: conv,
        intercept_mode: p.mode,
        sigma2_ce: est,
        fit: reported(conv, &eval),
    };
    emit(a.data.out.as_deref(), ".json", &to_json(&out)?)
}

fn cmd_select(a: SelectArgs) -> AppResult<()> {
    let p = load(&a.data)?;
    let conv = a.data.lambda_convention;
    let path = p.path()?;
    let fits = match a.grid {
        None => knot_fits(&path, &p.design, &p.y)?,
        Some(g) => g
            .values()
            .into_iter()
            .map(|l| solve_at(&path, &p.design, &p.y, conv.to_internal(l)))
            .collect::<Result<_, _>>()?,
    };
    let (sigma2, est) = a.scaling.sigma2(&p)?;
    let delta = a.scaling.delta(p.n())?;
    let evals = fits
        .into_iter()
        .map(|f| p.evaluate(f, delta, sigma2))
        .collect::<AppResult<Vec<_>>>()?;
    let value = |e: &Evaluation| match a.criterion {
        CriterionArg::Plain => e.sure_plain,
        CriterionArg::Scaled => e.sure_scaled,
    };
    // ties go to the larger λ
    let best = evals
        .iter()
        .filter(|e| !value(e).is_nan())
        .min_by(|x, y| {
            value(x)
                .total_cmp(&value(y))
                .then(y.lambda.total_cmp(&x.lambda))
        })
        .ok_or(lasso_s_core::Error::EmptyCandidateSet)?;
    let out = SelectOutput {
        lambda_convention: conv,
        intercept_mode: p.mode,
        criterion: a.criterion,
        sigma2_ce: est,
        selected: reported(conv, best),
        candidates: evals
            .iter()
            .map(|e| Candidate {
                lambda: conv.from_internal(e.lambda),
                k_active: e.k_active,
                alpha_hat: e.alpha_hat,
                sure_plain: e.sure_plain,
                sure_scaled: e.sure_scaled,
            })
            .collect(),
    };
    emit(a.data.out.as_deref(), ".json", &to_json(&out)?)
}

fn cmd_simulate(a: SimulateArgs) -> AppResult<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    let sim = &mut cfg.simulation;
    if let Some(s) = a.seed {
        sim.seed = s;
    }
    if let Some(t) = a.trials {
        sim.trials = t;
    }
    if let Some(d) = a.delta {
        sim.delta = Some(d);
    }
    if let Some(g) = a.gamma {
        sim.gamma = g;
    }
    if let Some(s) = a.sigma2 {
        sim.sigma2 = s;
    }
    let out = a.out.or_else(|| cfg.out.clone());
    let sim = cfg.resolved()?;
    let report = run_trials(&sim, cfg.threads)?;
    match out.as_deref() {
        Some(stem) => {
            emit(Some(stem), ".csv", &report_csv(&report)?)?;
            emit(Some(stem), ".json", &to_json(&report)?)
        }
        None => emit(None, "", &report_csv(&report)?),
    }
}
