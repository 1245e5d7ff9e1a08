use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lasso_s::io::DataFile;
use lasso_s::model::{InterceptMode, Problem};
use lasso_s_core::{solve_at, SimConfig, SimContext};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lasso-s"));
    c.env_remove("LASSO_S_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three predictors, 30 rows, response `1 + 2 x1 - x3` plus a fixed wiggle.
fn toy_csv(dir: &Path) -> PathBuf {
    let mut text = String::from("x1,x2,x3,y\n");
    for i in 0..30 {
        let t = i as f64;
        let (a, b, c) = ((t * 0.7).sin(), (t * 1.3).cos(), (t * 0.31).sin() + 0.1 * t);
        let y = 1.0 + 2.0 * a - c + 0.3 * (t * 2.9).sin();
        text.push_str(&format!("{a},{b},{c},{y}\n"));
    }
    write(dir, "toy.csv", &text)
}

#[test]
fn one_d_path() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n1,2\n1,0\n");
    let stem = dir.path().join("one");
    let out = run(&[
        "path",
        "--data",
        s(&data),
        "--raw",
        "--intercept",
        "none",
        "--out",
        s(&stem),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = std::fs::read_to_string(dir.path().join("one.path.csv")).unwrap();
    let lines: Vec<&str> = path.lines().collect();
    assert_eq!(lines[0], "step,lambda,event,column,name,k_active");
    assert_eq!(lines[1], "0,2.0000000000000000e0,enter,0,x,1");
    assert_eq!(lines[2], "1,0.0000000000000000e0,end,,,1");
    let coefs = DataFile::read(&dir.path().join("one.coefficients.csv")).unwrap();
    assert_eq!(coefs.names, ["lambda", "intercept", "x"]);
    // β = (2 - λ)/2 at both transition points
    let want = [[2.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    assert_eq!(coefs.rows.len(), 2);
    for (row, w) in coefs.rows.iter().zip(want) {
        assert!(
            row.iter().zip(w).all(|(a, b)| (a - b).abs() < 1e-14),
            "{row:?}"
        );
    }
}

#[test]
fn full_cost_convention_doubles_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n1,2\n1,0\n");
    let out = run(&[
        "path",
        "--data",
        s(&data),
        "--raw",
        "--intercept",
        "none",
        "--lambda-convention",
        "paper",
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0,4.0000000000000000e0,enter"));
    let half = json(&run(&[
        "fit",
        "--data",
        s(&data),
        "--raw",
        "--intercept",
        "none",
        "--lambda",
        "1",
    ]));
    let paper = json(&run(&[
        "fit",
        "--data",
        s(&data),
        "--raw",
        "--intercept",
        "none",
        "--lambda",
        "2",
        "--lambda-convention",
        "paper",
    ]));
    assert_eq!(half["fit"]["coefficients"], paper["fit"]["coefficients"]);
    assert!((half["fit"]["coefficients"][0].as_f64().unwrap() - 0.5).abs() < 1e-14);
    assert_eq!(paper["fit"]["lambda"].as_f64().unwrap(), 2.0);
    assert_eq!(paper["lambda_convention"], "paper");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.csv", "");
    let bad = write(dir.path(), "b.csv", "a,y\n1,2\nfoo,3\n");
    let toy = toy_csv(dir.path());
    for args in [
        vec!["path", "--data", s(&empty)],
        vec!["path", "--data", s(&bad)],
        vec!["path", "--data", "/nonexistent/file.csv"],
        vec!["path", "--data", s(&toy), "--response", "nope"],
        vec!["path", "--data", s(&toy), "--raw"],
        vec!["fit", "--data", s(&toy), "--lambda", "-1"],
        vec!["fit", "--data", s(&toy), "--lambda", "1", "--delta", "0"],
        vec!["select", "--data", s(&toy), "--criterion", "best"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.csv", "a,b,y\n1,1,1\n2,2,0\n4,4,3\n3,3,1\n");
    assert_eq!(code(&run(&["path", "--data", s(&dup)])), 3);
    let toy = toy_csv(dir.path());
    let path = String::from_utf8(run(&["path", "--data", s(&toy)]).stdout).unwrap();
    let knot = path
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .to_string();
    assert_eq!(
        code(&run(&["fit", "--data", s(&toy), "--lambda", &knot])),
        3
    );
}

#[test]
fn original_scale_coefficients_reproduce_fit() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_csv(dir.path());
    let data = DataFile::read(&toy).unwrap();
    let (x, y, names) = data.split(None).unwrap();
    for mode in ["penalized", "free", "none"] {
        let out = json(&run(&[
            "fit",
            "--data",
            s(&toy),
            "--lambda",
            "3.5",
            "--intercept",
            mode,
        ]));
        let fit = &out["fit"];
        let b0 = fit["intercept"].as_f64().unwrap();
        let b: Vec<f64> = fit["coefficients"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let im = match mode {
            "penalized" => InterceptMode::Penalized,
            "free" => InterceptMode::Free,
            _ => InterceptMode::None,
        };
        let p = Problem::new(x.clone(), y.clone(), names.clone(), im).unwrap();
        let path = p.path().unwrap();
        let f = solve_at(&path, &p.design, &p.y, 3.5).unwrap();
        for i in 0..x.nrows() {
            let raw: f64 = b0 + (0..3).map(|j| x[(i, j)] * b[j]).sum::<f64>();
            assert!((raw - (f.mu[i] + p.offset)).abs() < 1e-9, "{mode}");
        }
    }
}

#[test]
fn select_reports_choice_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_csv(dir.path());
    let out = json(&run(&["select", "--data", s(&toy), "--sigma2", "1.0"]));
    assert_eq!(out["selected"]["sigma2_used"].as_f64().unwrap(), 1.0);
    assert_eq!(out["criterion"], "scaled");
    assert_eq!(out["lambda_convention"], "half");
    assert!(out["sigma2_ce"].as_f64().unwrap() > 0.0);
    assert!(out["selected"]["kkt_max_violation"].as_f64().unwrap() < 1e-9);
    let best = out["selected"]["sure_scaled"].as_f64().unwrap();
    for c in out["candidates"].as_array().unwrap() {
        assert!(c["sure_scaled"].as_f64().unwrap() >= best);
    }
    let grid = json(&run(&[
        "select",
        "--data",
        s(&toy),
        "--grid",
        "0.5,20,9",
        "--criterion",
        "plain",
    ]));
    assert_eq!(grid["candidates"].as_array().unwrap().len(), 9);
    assert_eq!(grid["criterion"], "plain");
}

#[test]
fn noiseless_selection_passes_kkt() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,c,y\n");
    for i in 0..20 {
        let t = i as f64;
        let (a, b, c) = (t.sin(), (2.0 * t).cos(), t / 10.0);
        text.push_str(&format!("{a},{b},{c},{}\n", 3.0 * a - 2.0 * c));
    }
    let data = write(dir.path(), "clean.csv", &text);
    let out = json(&run(&["select", "--data", s(&data), "--intercept", "free"]));
    assert!(out["selected"]["kkt_max_violation"].as_f64().unwrap() < 1e-9);
}

/// CSV of one synthetic Gaussian-basis data set.
fn basis_csv(ctx: &SimContext, trial: u64) -> String {
    let y = ctx.response(trial);
    let m = ctx.raw.ncols();
    let mut text: Vec<String> = (1..=m).map(|j| format!("g{j}")).collect();
    text.push("y".into());
    let mut out = text.join(",") + "\n";
    for (i, yi) in y.iter().enumerate() {
        let row: Vec<String> = (0..m)
            .map(|j| format!("{:e}", ctx.raw[(i, j)]))
            .chain([format!("{yi:e}")])
            .collect();
        out += &(row.join(",") + "\n");
    }
    out
}

#[test]
fn scaled_criterion_selects_sparser_models_mostly() {
    let ctx = SimContext::new(SimConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (mut sparser, total) = (0, 9);
    for t in 0..total {
        let data = write(dir.path(), "g.csv", &basis_csv(&ctx, t));
        let k = |crit: &str| {
            let out = json(&run(&["select", "--data", s(&data), "--criterion", crit]));
            out["selected"]["k_active"].as_u64().unwrap()
        };
        if k("scaled") <= k("plain") {
            sparser += 1;
        }
    }
    assert!(sparser * 2 > total, "{sparser} of {total}");
}

const SMALL: &str = r#"{
  "simulation": {"n": 40, "m": 10, "k_star": [2, 7], "beta_star": [1.0, -1.5], "trials": 20, "seed": 7}
}"#;

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let st = bin()
        .args(["simulate", "--config", s(&cfg), "--out", s(&a)])
        .env("LASSO_S_THREADS", "1")
        .status();
    assert!(st.unwrap().success());
    let st = bin()
        .args(["simulate", "--config", s(&cfg), "--out", s(&b)])
        .env("LASSO_S_THREADS", "3")
        .status();
    assert!(st.unwrap().success());
    for ext in ["csv", "json"] {
        let x = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let y = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(x, y, "{ext}");
    }
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(report["completed"], 20);
    assert_eq!(report["selections"].as_array().unwrap().len(), 20);
    // only the four outputs, no leftover temporary files
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 5);
}

#[test]
fn simulate_overrides_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--trials",
        "3",
        "--seed",
        "9",
    ]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,3,"));
    assert_eq!(
        code(&run(&["simulate", "--config", s(&cfg), "--trials", "0"])),
        2
    );
    let unknown = write(
        dir.path(),
        "u.json",
        r#"{"simulation": {"n": 40, "m": 10, "sigma": 1}}"#,
    );
    assert_eq!(code(&run(&["simulate", "--config", s(&unknown)])), 2);
    let broken = write(dir.path(), "x.json", "{");
    assert_eq!(code(&run(&["simulate", "--config", s(&broken)])), 2);
    let threads = bin()
        .args(["simulate", "--config", s(&cfg)])
        .env("LASSO_S_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
}

#[test]
fn commands_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_csv(dir.path());
    let stem = dir.path().join("p");
    let first = {
        run(&["path", "--data", s(&toy), "--out", s(&stem)]);
        std::fs::read(dir.path().join("p.coefficients.csv")).unwrap()
    };
    run(&["path", "--data", s(&toy), "--out", s(&stem)]);
    assert_eq!(
        first,
        std::fs::read(dir.path().join("p.coefficients.csv")).unwrap()
    );
    let a = run(&["select", "--data", s(&toy)]).stdout;
    let b = run(&["select", "--data", s(&toy)]).stdout;
    assert_eq!(a, b);
}
