//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use lasso_s::config::RunConfig;
use lasso_s::runner::{fixed_lambda_samples, mean_expansion, run_trials};
use lasso_s_core::sim::risk_gap_from_samples;
use lasso_s_core::{
    coordinate_descent, df_terms, empirical_alpha, hat_quantities, kkt_check, lars_lasso_path,
    solve_at, ScalingConfig, SimConfig, SimContext, TrialReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

const SEED: u64 = 0x5eed_1a55;

fn bundled(name: &str) -> SimConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name);
    RunConfig::read(&p).unwrap().resolved().unwrap()
}

fn identity_suite() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let mut worst = [0.0f64; 6];
    let mut checked = 0;
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        let (d, y) = (&inst.design, &inst.y);
        let cfg = ScalingConfig::new(1.0 / d.n() as f64).unwrap();
        for lam in interior_lambdas(&mut rng, &inst.path, 5) {
            let fit = solve_at(&inst.path, d, y, lam).unwrap();
            if fit.k_active == 0 {
                continue;
            }
            checked += 1;
            let q = q_vector(d, &fit.active_set, &fit.signs);
            let l1: f64 = fit.beta_active.iter().map(|b| b.abs()).sum();
            let mu2 = norm2(&fit.mu);
            let muy = dot(&fit.mu, y);
            let scale = mu2.max(norm2(y));
            // μ̂'q̂ = ||β̂||₁
            worst[0] = worst[0].max(rel_err(dot(&fit.mu, &q), l1, 1e-12));
            // ||μ̂||² = μ̂'y - λq̂'y + λ²||q̂||²
            worst[1] = worst[1].max(rel_err(
                mu2,
                muy - lam * dot(&q, y) + lam * lam * norm2(&q),
                scale,
            ));
            // ||μ̂||² = μ̂'y - λ||β̂||₁
            worst[2] = worst[2].max(rel_err(mu2, muy - lam * l1, scale));
            // Hμ̂ = μ̂, with the crate's projection and with the oracle
            let hq = hat_quantities(&fit, d, y).unwrap();
            let h_mu = project(d, &fit.active_set, &fit.mu);
            let mu_inf = fit.mu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let e9 = fit
                .mu
                .iter()
                .zip(&h_mu)
                .zip(hq.apply_hat(&fit.mu))
                .map(|((m, a), b)| (m - a).abs().max((m - b).abs()))
                .fold(0.0f64, f64::max)
                / mu_inf;
            worst[3] = worst[3].max(e9);
            // two forms of α̂
            let a26 = empirical_alpha(&fit, y, cfg);
            let a27 = 1.0 + lam * l1 / (mu2 + cfg.delta);
            worst[4] = worst[4].max(rel_err(a26, a27, 1.0));
            // ||y - α̂μ̂||² = ||y - μ̂||² - (1 - α̂)²(||μ̂||² + 2δ)
            let scaled: Vec<f64> = fit.mu.iter().map(|m| a26 * m).collect();
            let lhs = rss(y, &scaled);
            let rhs = rss(y, &fit.mu) - (1.0 - a26) * (1.0 - a26) * (mu2 + 2.0 * cfg.delta);
            worst[5] = worst[5].max(rel_err(lhs, rhs, rss(y, &fit.mu)));
        }
    }
    let tol = [1e-8, 1e-8, 1e-8, 1e-8, 1e-9, 1e-9];
    let pass = worst.iter().zip(tol).all(|(w, t)| *w <= t);
    verdict(
        pass,
        format!(
            "{checked} fits; max rel err: mu'q {:.1e}, norm via q {:.1e}, norm via l1 {:.1e}, H mu {:.1e}, alpha forms {:.1e}, residual identity {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn solver_equivalence() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let mut max_diff = 0.0f64;
    let mut max_kkt = 0.0f64;
    let mut fits = 0;
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        let (d, y) = (&inst.design, &inst.y);
        for lam in interior_lambdas(&mut rng, &inst.path, 5) {
            let a = solve_at(&inst.path, d, y, lam).unwrap();
            let b = coordinate_descent(d, y, lam, 1e-13).unwrap();
            let diff = a
                .beta_full
                .iter()
                .zip(&b.beta_full)
                .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
            max_diff = max_diff.max(diff);
            for f in [&a, &b] {
                max_kkt = max_kkt.max(kkt_check(f, d, y, 0.0).max_violation());
            }
            fits += 1;
        }
    }
    verdict(
        max_diff <= 1e-6 && max_kkt <= 1e-8,
        format!(
            "{fits} λ values; max |β_path - β_cd| {max_diff:.2e}, max KKT violation {max_kkt:.2e}"
        ),
    )
}

/// Central finite-difference divergence of `y ↦ α̂(y) μ̂(y)`, or `None` if
/// some probe changes the active set or its signs.
fn fd_divergence(inst: &Instance, lam: f64, cfg: ScalingConfig, h: f64) -> Option<f64> {
    let base = solve_at(&inst.path, &inst.design, &inst.y, lam).ok()?;
    let mut total = 0.0;
    for i in 0..inst.y.len() {
        let mut side = [0.0; 2];
        for (k, sgn) in [1.0, -1.0].into_iter().enumerate() {
            let mut y = inst.y.clone();
            y[i] += sgn * h;
            let path = lars_lasso_path(&inst.design, &y).ok()?;
            let fit = solve_at(&path, &inst.design, &y, lam).ok()?;
            let mut a: Vec<(usize, i8)> = fit
                .active_set
                .iter()
                .copied()
                .zip(fit.signs.iter().copied())
                .collect();
            let mut b: Vec<(usize, i8)> = base
                .active_set
                .iter()
                .copied()
                .zip(base.signs.iter().copied())
                .collect();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return None;
            }
            side[k] = empirical_alpha(&fit, &y, cfg) * fit.mu[i];
        }
        total += (side[0] - side[1]) / (2.0 * h);
    }
    Some(total)
}

fn divergence_check() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED ^ 3);
    let (mut done, mut redrawn) = (0, 0);
    let mut worst = 0.0f64;
    while done < 50 {
        let inst = random_instance(&mut rng);
        let cfg = ScalingConfig::new(1.0 / inst.design.n() as f64).unwrap();
        let lam = interior_lambdas(&mut rng, &inst.path, 1)[0];
        let Some(fd) = fd_divergence(&inst, lam, cfg, 1e-5) else {
            redrawn += 1;
            continue;
        };
        let fit = solve_at(&inst.path, &inst.design, &inst.y, lam).unwrap();
        let df = df_terms(&fit, &inst.y, cfg).unwrap();
        worst = worst.max((fd - df.total()).abs());
        done += 1;
    }
    verdict(
        worst <= 1e-4,
        format!("50 instances ({redrawn} redrawn after an active-set change); max |FD div - (d1 + d2)| {worst:.2e}"),
    )
}

/// Largest `|mean(SURE - risk)| / SE` over steps, for the plain and scaled criteria.
fn sure_z(report: &TrialReport, true_sigma: bool) -> (f64, f64) {
    let z = |m: lasso_s_core::sim::MeanSe| {
        if m.se > 0.0 {
            m.mean.abs() / m.se
        } else {
            f64::INFINITY
        }
    };
    report.steps.iter().fold((0.0f64, 0.0f64), |(p, s), st| {
        let (dp, ds) = if true_sigma {
            (st.diff_plain_true, st.diff_scaled_true)
        } else {
            (st.diff_plain, st.diff_scaled)
        };
        (p.max(z(dp)), s.max(z(ds)))
    })
}

struct FigureChecks {
    a: bool,
    b_violations: Vec<(f64, f64, f64)>,
    c: (f64, f64),
    summary: String,
}

fn figure_checks(report: &TrialReport, strict: bool) -> FigureChecks {
    let (zp, zs) = sure_z(report, false);
    let (tp, ts) = sure_z(report, true);
    let b_violations = report
        .steps
        .iter()
        .filter(|s| s.mean_k <= 10.0)
        .filter(|s| {
            let (rs, rp) = (s.risk_scaled.mean, s.risk_plain.mean);
            if strict {
                rs >= rp
            } else {
                rs > rp
            }
        })
        .map(|s| (s.mean_k, s.risk_scaled.mean, s.risk_plain.mean))
        .collect();
    let min_k = |f: fn(&lasso_s_core::sim::StepSummary) -> f64| {
        report
            .steps
            .iter()
            .min_by(|x, y| f(x).total_cmp(&f(y)))
            .map_or(f64::NAN, |s| s.mean_k)
    };
    let c = (min_k(|s| s.risk_scaled.mean), min_k(|s| s.risk_plain.mean));
    FigureChecks {
        a: zp <= 2.0 && zs <= 2.0,
        b_violations,
        c,
        summary: format!(
            "{} trials, {} steps, {} failed; max |z| SURE-risk plain {zp:.2} scaled {zs:.2} (true σ²: {tp:.2} / {ts:.2})",
            report.completed,
            report.steps.len(),
            report.failures.len()
        ),
    }
}

fn describe_b(v: &[(f64, f64, f64)]) -> String {
    if v.is_empty() {
        return "ok".into();
    }
    let list: Vec<String> = v
        .iter()
        .map(|(k, rs, rp)| format!("k̂={k:.2}: scaled {rs:.4} vs plain {rp:.4}"))
        .collect();
    format!("violated at {}", list.join("; "))
}

fn figure(name: &str, strict: bool) -> Verdict {
    let report = run_trials(&bundled(name), None).unwrap();
    let f = figure_checks(&report, strict);
    let c_ok = f.c.0 <= f.c.1;
    let b_ok = f.b_violations.is_empty();
    verdict(
        f.a && b_ok && c_ok,
        format!(
            "{}; (a) {}; (b{}) {}; (c) risk-minimizing k̂ scaled {:.2} vs plain {:.2}: {}",
            f.summary,
            if f.a { "ok" } else { "FAILED" },
            if strict { "" } else { ", non-strict" },
            describe_b(&f.b_violations),
            f.c.0,
            f.c.1,
            if c_ok { "ok" } else { "FAILED" }
        ),
    )
}

fn noise_estimator() -> Verdict {
    let ctx = SimContext::new(SimConfig::default()).unwrap();
    let vals: Vec<f64> = (0..200)
        .map(|t| ctx.noise.estimate(&ctx.response(t)).unwrap().sigma2)
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    verdict(
        (0.95..=1.05).contains(&mean),
        format!("mean σ̂²_CE over 200 trials = {mean:.4}"),
    )
}

fn expansion_bound() -> Verdict {
    let lambdas = [2.0, 5.0, 10.0, 20.0];
    let mut lines = Vec::new();
    let mut pass = true;
    let mut means = Vec::new();
    for n in [100, 400] {
        let cfg = SimConfig {
            n,
            ..SimConfig::default()
        };
        let ctx = SimContext::new(cfg.clone()).unwrap();
        let gram = ctx.spectrum();
        let m = mean_expansion(&cfg, &lambdas, None).unwrap();
        for (l, e) in lambdas.iter().zip(&m) {
            let bound = gram.expansion_bound(*l, cfg.delta());
            pass &= e.mean <= bound;
        }
        lines.push(format!(
            "n={n} (ρ_min {:.1e}): mean(α̂-1) {}",
            gram.rho_min,
            m.iter()
                .map(|e| format!("{:.4}", e.mean))
                .collect::<Vec<_>>()
                .join("/")
        ));
        means.push(m);
    }
    let shrinks = means[1].iter().zip(&means[0]).all(|(a, b)| a.mean < b.mean);
    // well-conditioned variant: narrow bumps give ρ_min ≥ 0.1
    let narrow = SimConfig {
        tau: 0.002,
        trials: 200,
        ..SimConfig::default()
    };
    let gram = SimContext::new(narrow.clone()).unwrap().spectrum();
    let m = mean_expansion(&narrow, &lambdas, None).unwrap();
    let narrow_ok = gram.rho_min >= 0.1
        && lambdas
            .iter()
            .zip(&m)
            .all(|(l, e)| e.mean <= gram.expansion_bound(*l, narrow.delta()));
    lines.push(format!(
        "τ=0.002 (ρ_min {:.3}): bound {}",
        gram.rho_min,
        if narrow_ok { "ok" } else { "FAILED" }
    ));
    verdict(
        pass && shrinks && narrow_ok,
        format!(
            "λ = 2/5/10/20; {}; bound {}; n=400 below n=100: {}",
            lines.join("; "),
            if pass { "ok" } else { "FAILED" },
            if shrinks { "ok" } else { "FAILED" }
        ),
    )
}

fn risk_gap() -> Verdict {
    let cfg = SimConfig::default();
    let ctx = SimContext::new(cfg.clone()).unwrap();
    let lambdas = [5.0, 10.0, 20.0];
    let samples = fixed_lambda_samples(&ctx, &lambdas, None).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (l, s) in lambdas.iter().zip(&samples) {
        let g = risk_gap_from_samples(s, cfg.sigma2, cfg.n).unwrap();
        let ok = (g.lhs - g.rhs).abs() <= 3.0 * g.se;
        pass &= ok;
        parts.push(format!(
            "λ={l}: α_opt {:.3}, lhs {:.5}, rhs {:.5}, SE {:.1e}",
            g.alpha_opt, g.lhs, g.rhs, g.se
        ));
    }
    verdict(pass, parts.join("; "))
}

type Criterion = (&'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "1 algebraic identities",
            identity_suite,
            Duration::from_secs(60),
        ),
        (
            "2 path vs coordinate descent",
            solver_equivalence,
            Duration::from_secs(120),
        ),
        (
            "3 divergence of the scaled fit",
            divergence_check,
            Duration::from_secs(120),
        ),
        (
            "4 Gaussian basis, τ=0.1",
            || figure("fig1a.json", true),
            Duration::from_secs(600),
        ),
        (
            "5 Gaussian basis, τ=0.4",
            || figure("fig1b.json", false),
            Duration::from_secs(600),
        ),
        (
            "6 noise variance estimate",
            noise_estimator,
            Duration::from_secs(60),
        ),
        (
            "7 expansion bound",
            expansion_bound,
            Duration::from_secs(600),
        ),
        (
            "8 optimal-scaling risk gap",
            risk_gap,
            Duration::from_secs(600),
        ),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t = Instant::now();
        let v = run();
        let dt = t.elapsed();
        let in_time = dt <= budget;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {} [{:.1}s{}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            dt.as_secs_f64(),
            if in_time { "" } else { ", over time budget" }
        );
    }
    if failed > 0 {
        println!("{failed} of 8 acceptance criteria failed");
        std::process::exit(1);
    }
}
