//! Independent oracles shared by the integration and acceptance tests.
//!
//! Linear systems here are solved by Gaussian elimination with partial
//! pivoting, not by the Cholesky routines of the crate under test.

#![allow(dead_code)]

use lasso_s_core::{lars_lasso_path, standardize_design, DesignMatrix, LassoPath, Matrix};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn rss(y: &[f64], mu: &[f64]) -> f64 {
    y.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `|a - b| <= tol · max(|a|, |b|, floor)`
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Solve `A x = b` for square `A` given as rows.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for c in 0..k {
        let p = (c..k)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            let (top, bottom) = a.split_at_mut(r);
            for (x, pivot) in bottom[0][c..k].iter_mut().zip(&top[c][c..k]) {
                *x -= f * pivot;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Gram matrix of the columns `idx`, as rows.
pub fn sub_gram(design: &DesignMatrix, idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter()
        .map(|&i| {
            idx.iter()
                .map(|&j| dot(design.col(i), design.col(j)))
                .collect()
        })
        .collect()
}

/// `X_B c`
pub fn combine(design: &DesignMatrix, idx: &[usize], c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; design.n()];
    for (&j, &cj) in idx.iter().zip(c) {
        for (o, x) in out.iter_mut().zip(design.col(j)) {
            *o += cj * x;
        }
    }
    out
}

/// `X_B (X_B'X_B)^{-1} S`
pub fn q_vector(design: &DesignMatrix, idx: &[usize], signs: &[i8]) -> Vec<f64> {
    let s: Vec<f64> = signs.iter().map(|&v| f64::from(v)).collect();
    combine(design, idx, &gauss_solve(sub_gram(design, idx), s))
}

/// `X_B (X_B'X_B)^{-1} X_B' v`
pub fn project(design: &DesignMatrix, idx: &[usize], v: &[f64]) -> Vec<f64> {
    let rhs: Vec<f64> = idx.iter().map(|&j| dot(design.col(j), v)).collect();
    combine(design, idx, &gauss_solve(sub_gram(design, idx), rhs))
}

/// `(1/2)||y - Xb||² + λ||b||₁`
pub fn lasso_cost(design: &DesignMatrix, y: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let mu = design.predict(beta);
    0.5 * rss(y, &mu) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random regression instance with a LARS-LASSO path.
pub struct Instance {
    pub design: DesignMatrix,
    pub y: Vec<f64>,
    pub path: LassoPath,
}

/// `n` in 20..=100 and 2..=20 design columns (an intercept counts as one),
/// correlated Gaussian predictors and a sparse signal.
pub fn random_instance(rng: &mut ChaCha20Rng) -> Instance {
    loop {
        let n = rng.random_range(20..=100usize);
        let m = rng.random_range(2..=20usize);
        let intercept = rng.random_bool(0.5);
        let m_raw = m - usize::from(intercept);
        let rho: f64 = rng.random_range(0.0..0.6);
        let shared: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let raw = Matrix::from_fn(n, m_raw, |i, _| rho.sqrt() * shared[i]);
        let raw = Matrix::from_fn(n, m_raw, |i, j| {
            raw[(i, j)] + (1.0 - rho).sqrt() * normal(rng) + 0.3 * j as f64
        });
        let Ok(design) = standardize_design(&raw, intercept) else {
            continue;
        };
        let beta: Vec<f64> = (0..design.m())
            .map(|_| {
                if rng.random_bool(0.4) {
                    2.0 * normal(rng)
                } else {
                    0.0
                }
            })
            .collect();
        let sigma: f64 = rng.random_range(0.3..2.0);
        let mut y = design.predict(&beta);
        for v in &mut y {
            *v += sigma * normal(rng);
        }
        if let Ok(path) = lars_lasso_path(&design, &y) {
            return Instance { design, y, path };
        }
    }
}

/// `count` λ values in `(0, λ_0)` at relative distance at least `1e-6 λ_0`
/// from every transition point.
pub fn interior_lambdas(rng: &mut ChaCha20Rng, path: &LassoPath, count: usize) -> Vec<f64> {
    let l0 = path.lambda_max();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = l0 * rng.random_range(0.001..0.999);
        if path
            .transition_lambdas
            .iter()
            .all(|t| (t - l).abs() > 1e-6 * l0)
        {
            out.push(l);
        }
    }
    out
}
