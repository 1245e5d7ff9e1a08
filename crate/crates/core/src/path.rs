//! LARS with the LASSO modification: the exact piecewise-affine solution path.
//!
//! On a segment with active set `B` and signs `S` the solution is
//! `beta_B(λ) = (X_B'X_B)^{-1}(X_B'y - λ S) = a - λ d`. Walking λ downward,
//! the segment ends either when an inactive correlation reaches `±λ`
//! (the column enters) or when an active coefficient reaches zero (it
//! leaves). The active-set Gram factor is maintained incrementally.

use alloc::vec::Vec;

use crate::design::{fingerprint, DesignMatrix};
use crate::error::{check_len, Error, Result};
use crate::fit::LassoFit;
use crate::linalg::{dot, Cholesky, REFACTOR_TOL};

/// λ within this fraction of `λ_0` of a transition point counts as on it.
pub const TRANSITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PathEvent {
    Enter(usize),
    Leave(usize),
}

/// One open interval `(lambda_lo, lambda_hi)` of constant active set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathSegment {
    pub lambda_hi: f64,
    pub lambda_lo: f64,
    pub active_set: Vec<usize>,
    pub signs: Vec<i8>,
    /// `beta_B(λ) = offset - λ slope`
    pub offset: Vec<f64>,
    pub slope: Vec<f64>,
    /// Event at `lambda_hi` that produced this active set.
    pub event: PathEvent,
}

impl PathSegment {
    pub fn beta_active_at(&self, lambda: f64) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.slope)
            .map(|(a, d)| a - lambda * d)
            .collect()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lambda_hi + self.lambda_lo)
    }

    pub fn k_active(&self) -> usize {
        self.active_set.len()
    }
}

/// Full LASSO path for one `(X, y)` pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LassoPath {
    /// `λ_0 > λ_1 > ... > λ_J = 0`
    pub transition_lambdas: Vec<f64>,
    /// `segments[j]` covers `(λ_{j+1}, λ_j)`.
    pub segments: Vec<PathSegment>,
    /// Columns never admitted because they were collinear with the active set.
    pub skipped: Vec<usize>,
    design_ref: u64,
    response_ref: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LarsOptions {
    /// Defaults to `3 m`.
    pub max_steps: Option<usize>,
    /// Skip columns whose entry would make the active Gram matrix singular
    /// instead of failing with `RankDeficient`.
    pub skip_collinear: bool,
}

impl LassoPath {
    pub fn lambda_max(&self) -> f64 {
        self.transition_lambdas[0]
    }

    /// Index of the segment whose open interval contains `lambda`.
    pub fn segment_index(&self, lambda: f64) -> Option<usize> {
        if lambda == 0.0 {
            return self.segments.len().checked_sub(1);
        }
        self.segments
            .iter()
            .position(|s| lambda < s.lambda_hi && lambda > s.lambda_lo)
    }

    /// Coefficients at any λ, read off the affine segment representation.
    pub fn beta_at(&self, lambda: f64, m: usize) -> Vec<f64> {
        let mut beta = alloc::vec![0.0; m];
        if lambda >= self.lambda_max() {
            return beta;
        }
        let seg = self
            .segments
            .iter()
            .find(|s| lambda <= s.lambda_hi && lambda >= s.lambda_lo);
        if let Some(seg) = seg {
            for (&j, b) in seg.active_set.iter().zip(seg.beta_active_at(lambda)) {
                beta[j] = b;
            }
        }
        beta
    }

    /// Nearest transition point to `lambda` if it lies within the tolerance.
    /// The terminal point `λ_J = 0` never counts.
    pub fn transition_near(&self, lambda: f64) -> Option<f64> {
        let tol = TRANSITION_TOL * self.lambda_max();
        self.transition_lambdas
            .iter()
            .copied()
            .filter(|&t| t > 0.0)
            .find(|&t| (lambda - t).abs() <= tol)
    }

    /// The solution at the transition point closing segment `s`, given as
    /// `(λ_{s+1}, active set, signs)`. A column that leaves at that point has
    /// a zero coefficient there and is not included. Fits at these points are
    /// what the per-step statistics use: there the active-set size is an
    /// unbiased degrees-of-freedom estimate even though the point depends on y.
    pub fn knot(&self, s: usize) -> (f64, Vec<usize>, Vec<i8>) {
        let seg = &self.segments[s];
        let leaving = match self.segments.get(s + 1).map(|n| n.event) {
            Some(PathEvent::Leave(j)) => Some(j),
            _ => None,
        };
        let (active, signs) = seg
            .active_set
            .iter()
            .zip(&seg.signs)
            .filter(|(&j, _)| Some(j) != leaving)
            .map(|(&j, &s)| (j, s))
            .unzip();
        (seg.lambda_lo, active, signs)
    }

    fn check_source(&self, design: &DesignMatrix, y: &[f64]) -> Result<()> {
        if self.design_ref != design.fingerprint() || self.response_ref != fingerprint(y, 0) {
            return Err(Error::PathMismatch);
        }
        Ok(())
    }
}

pub fn lars_lasso_path(design: &DesignMatrix, y: &[f64]) -> Result<LassoPath> {
    lars_lasso_path_with(design, y, LarsOptions::default())
}

struct ActiveState<'a> {
    design: &'a DesignMatrix,
    active: Vec<usize>,
    signs: Vec<f64>,
    chol: Cholesky,
}

impl ActiveState<'_> {
    fn enter(&mut self, j: usize, sign: f64) -> bool {
        let g = self.design.gram();
        let border: Vec<f64> = self.active.iter().map(|&k| g[(j, k)]).collect();
        if self.chol.push(&border, g[(j, j)]).is_err() {
            return false;
        }
        self.active.push(j);
        self.signs.push(sign);
        true
    }

    fn leave(&mut self, j: usize) -> Result<()> {
        let pos = self
            .active
            .iter()
            .position(|&k| k == j)
            .expect("leaving column is active");
        self.chol.remove(pos);
        self.active.remove(pos);
        self.signs.remove(pos);
        if !self.active.is_empty() && self.chol.min_diagonal() < REFACTOR_TOL {
            let g = self.design.gram().principal(&self.active);
            self.chol = Cholesky::factor(&g).map_err(|e| Error::RankDeficient {
                column: self.active[e.index],
            })?;
        }
        Ok(())
    }
}

pub fn lars_lasso_path_with(
    design: &DesignMatrix,
    y: &[f64],
    opts: LarsOptions,
) -> Result<LassoPath> {
    check_len(design.n(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "response contains non-finite values".into(),
        ));
    }
    let m = design.m();
    let cap = opts.max_steps.unwrap_or(3 * m);
    let g = design.gram();
    let xty = design.correlations(y);

    let mut path = LassoPath {
        transition_lambdas: Vec::new(),
        segments: Vec::new(),
        skipped: Vec::new(),
        design_ref: design.fingerprint(),
        response_ref: fingerprint(y, 0),
    };

    // ties go to the lowest index
    let (mut first, mut lambda0) = (0, 0.0);
    for (j, c) in xty.iter().enumerate() {
        if c.abs() > lambda0 {
            first = j;
            lambda0 = c.abs();
        }
    }
    path.transition_lambdas.push(lambda0);
    if lambda0 == 0.0 {
        return Ok(path);
    }

    let mut state = ActiveState {
        design,
        active: Vec::new(),
        signs: Vec::new(),
        chol: Cholesky::empty(),
    };
    let mut ignored = alloc::vec![false; m];
    let mut event = PathEvent::Enter(first);
    let mut enter_sign = xty[first].signum();
    let mut steps = 0;
    let mut lambda_cur = lambda0;
    let mut just_entered: Option<usize> = None;
    // column that just left, with the sign it had
    let mut just_left: Option<(usize, f64)> = None;
    let floor = TRANSITION_TOL * lambda0;

    loop {
        match event {
            PathEvent::Enter(j) => {
                if !state.enter(j, enter_sign) {
                    if !opts.skip_collinear {
                        return Err(Error::RankDeficient { column: j });
                    }
                    // Undo the transition that was never realized and redo the
                    // previous segment without this column.
                    ignored[j] = true;
                    path.skipped.push(j);
                    if let Some(prev) = path.segments.pop() {
                        path.transition_lambdas.pop();
                        lambda_cur = prev.lambda_hi;
                    } else {
                        return Err(Error::RankDeficient { column: j });
                    }
                } else {
                    steps += 1;
                    just_entered = Some(j);
                    just_left = None;
                }
            }
            PathEvent::Leave(j) => {
                let pos = state
                    .active
                    .iter()
                    .position(|&k| k == j)
                    .expect("leaving column is active");
                let sign = state.signs[pos];
                state.leave(j)?;
                steps += 1;
                just_left = Some((j, sign));
                just_entered = None;
            }
        }
        if steps > cap {
            return Err(Error::MaxStepsExceeded { cap });
        }

        let xty_a: Vec<f64> = state.active.iter().map(|&k| xty[k]).collect();
        let offset = state.chol.solve(&xty_a);
        let slope = state.chol.solve(&state.signs);

        // (λ, column, event)
        let mut next: Option<(f64, usize, PathEvent, f64)> = None;
        let mut consider = |lam: f64, col: usize, ev: PathEvent, sign: f64| {
            // an exact tie at λ_cur is a simultaneous entry
            let tied = lam == lambda_cur && matches!(ev, PathEvent::Enter(_));
            // events within the transition tolerance of 0 are rounding noise
            // around the least-squares end point
            if !(lam > floor && (lam < lambda_cur || tied)) {
                return;
            }
            let better = match next {
                None => true,
                Some((best, bcol, _, _)) => lam > best || (lam == best && col < bcol),
            };
            if better {
                next = Some((lam, col, ev, sign));
            }
        };

        for j in 0..m {
            if ignored[j] || state.active.contains(&j) {
                continue;
            }
            // c_j is affine in λ, so the root with the old sign is the point
            // where j just left; only the opposite sign can bring it back
            let left_sign = just_left.and_then(|(k, s)| (k == j).then_some(s));
            let (mut r, mut w) = (xty[j], 0.0);
            for (pos, &k) in state.active.iter().enumerate() {
                r -= g[(j, k)] * offset[pos];
                w += g[(j, k)] * slope[pos];
            }
            // c_j(λ) = r + λ w reaches +λ or -λ
            if 1.0 - w > 0.0 && left_sign != Some(1.0) {
                consider(r / (1.0 - w), j, PathEvent::Enter(j), 1.0);
            }
            if 1.0 + w > 0.0 && left_sign != Some(-1.0) {
                consider(-r / (1.0 + w), j, PathEvent::Enter(j), -1.0);
            }
        }
        for (pos, &k) in state.active.iter().enumerate() {
            if Some(k) == just_entered || slope[pos] == 0.0 {
                continue;
            }
            consider(offset[pos] / slope[pos], k, PathEvent::Leave(k), 0.0);
        }

        if let Some((l, _, ev, sign)) = next {
            if l == lambda_cur {
                event = ev;
                enter_sign = sign;
                continue;
            }
        }
        let lambda_next = next.map_or(0.0, |(l, ..)| l);
        path.segments.push(PathSegment {
            lambda_hi: lambda_cur,
            lambda_lo: lambda_next,
            active_set: state.active.clone(),
            signs: state.signs.iter().map(|&s| s as i8).collect(),
            offset,
            slope,
            event,
        });
        path.transition_lambdas.push(lambda_next);
        match next {
            None => break,
            Some((l, _, ev, sign)) => {
                lambda_cur = l;
                event = ev;
                enter_sign = sign;
            }
        }
    }
    Ok(path)
}

/// LASSO solution at `lambda` from a precomputed path.
///
/// The coefficients are recomputed from the segment's active set and signs
/// by a fresh Gram solve rather than read off the stored affine pieces.
pub fn solve_at(
    path: &LassoPath,
    design: &DesignMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<LassoFit> {
    check_len(design.n(), y.len())?;
    path.check_source(design, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(alloc::format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if let Some(t) = path.transition_near(lambda) {
        return Err(Error::AtTransitionPoint {
            lambda,
            transition: t,
        });
    }
    if lambda >= path.lambda_max() {
        return Ok(LassoFit::zero(design, lambda));
    }
    let seg = match path.segment_index(lambda) {
        Some(i) => &path.segments[i],
        None => return Ok(LassoFit::zero(design, lambda)),
    };
    solve_on_active(design, y, lambda, &seg.active_set, &seg.signs)
}

/// Fits at the transition points `λ_1 > ... > λ_J` of the path, one per
/// segment (see [`LassoPath::knot`]).
pub fn knot_fits(path: &LassoPath, design: &DesignMatrix, y: &[f64]) -> Result<Vec<LassoFit>> {
    path.check_source(design, y)?;
    (0..path.segments.len())
        .map(|s| {
            let (lambda, active, signs) = path.knot(s);
            solve_on_active(design, y, lambda, &active, &signs)
        })
        .collect()
}

/// `beta_B = (X_B'X_B)^{-1}(X_B'y - λ S)` for a given active set and sign vector.
pub fn solve_on_active(
    design: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    active_set: &[usize],
    signs: &[i8],
) -> Result<LassoFit> {
    if active_set.is_empty() {
        return Ok(LassoFit::zero(design, lambda));
    }
    let chol = Cholesky::factor(&design.gram().principal(active_set)).map_err(|e| {
        Error::RankDeficient {
            column: active_set[e.index],
        }
    })?;
    let rhs: Vec<f64> = active_set
        .iter()
        .zip(signs)
        .map(|(&j, &s)| dot(design.col(j), y) - lambda * f64::from(s))
        .collect();
    let beta = chol.solve(&rhs);
    let mut fit = LassoFit::from_active(design, lambda, active_set.to_vec(), beta);
    // on a segment the signs are fixed by the path, not by rounding
    fit.signs = signs.to_vec();
    Ok(fit)
}
