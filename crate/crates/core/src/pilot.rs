//! S-Ridge: ridge-penalized S-estimator used to build adaptive weights.
//!
//! Minimizes `s²(y − Xβ) + λ‖β‖₂²` where `s` is the M-scale under ρ0. With
//! `ω_i = ψ0(t_i)/t_i` and `D = Σ ψ0(t_i) t_i` the gradient of `s²` is
//! `−(2/D) Σ ω_i r_i x_i`, so the weighted ridge problem
//! `(XᵀΩX + λD I) β = XᵀΩy` shares it at the current point. Its solution is
//! used as a search direction with step halving, as in the tau-Lasso solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid_param, Error, Result};
use crate::rho::TuningPair;
use crate::scale::m_scale_with_hint;
use crate::selection::{cross_validate, CvResult, Estimator, DEFAULT_FOLDS};
use crate::solver::{active_set, elemental_starts, FitResult, SolverOptions};

/// Number of values in [`default_pilot_grid`].
pub const PILOT_GRID_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotResult {
    pub beta: DVector<f64>,
    pub s: f64,
    pub lambda_ridge: f64,
    pub objective: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Which estimator supplies the adaptive weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotKind {
    SRidge,
    TauLasso,
}

struct Point {
    beta: DVector<f64>,
    s: f64,
    objective: f64,
}

fn evaluate(data: &Dataset, beta: DVector<f64>, lambda: f64, tuning: &TuningPair, hint: Option<f64>) -> Result<Point> {
    let r = data.residuals(&beta);
    let s = m_scale_with_hint(r.as_slice(), &tuning.rho0(), tuning.delta, hint)?.s;
    let objective = s * s + lambda * beta.norm_squared();
    if !objective.is_finite() {
        return Err(Error::SolverDivergence(format!("S-Ridge objective became {objective}")));
    }
    Ok(Point { beta, s, objective })
}

/// Solves `(XᵀΩX + μI) β = XᵀΩy`, in the dual form when `p > n`.
fn weighted_ridge(x: &DMatrix<f64>, y: &DVector<f64>, w: &[f64], mu: f64) -> Option<DVector<f64>> {
    let (n, p) = x.shape();
    let root: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let xw = DMatrix::from_fn(n, p, |i, j| root[i] * x[(i, j)]);
    let yw = DVector::from_fn(n, |i, _| root[i] * y[i]);
    let solve = |mut gram: DMatrix<f64>, rhs: DVector<f64>| {
        let m = gram.nrows();
        let jitter = 1e-12 * (gram.trace() / m as f64).max(f64::MIN_POSITIVE);
        for k in 0..m {
            gram[(k, k)] += mu.max(jitter);
        }
        gram.cholesky().map(|c| c.solve(&rhs))
    };
    if p <= n {
        solve(xw.tr_mul(&xw), xw.tr_mul(&yw))
    } else {
        solve(&xw * xw.transpose(), yw).map(|alpha| xw.tr_mul(&alpha))
    }
}

fn irwls(data: &Dataset, lambda: f64, tuning: &TuningPair, beta0: DVector<f64>, options: &SolverOptions) -> Result<PilotResult> {
    let rho0 = tuning.rho0();
    let mut cur = evaluate(data, beta0, lambda, tuning, None)?;
    let mut trace = vec![cur.objective];
    let mut converged = false;
    for _ in 0..options.max_iter {
        if cur.s == 0.0 {
            converged = true;
            break;
        }
        let r = data.residuals(&cur.beta);
        let w: Vec<f64> = r.iter().map(|v| rho0.weight(v / cur.s)).collect();
        let d: f64 = r.iter().map(|v| rho0.psi_times_t(v / cur.s)).sum();
        if !(d > 0.0) {
            return Err(Error::SolverDivergence("all S-Ridge weights vanished".into()));
        }
        let Some(target) = weighted_ridge(data.x(), data.y(), &w, lambda * d) else {
            return Err(Error::SolverDivergence("weighted ridge system is not positive definite".into()));
        };
        let direction = &target - &cur.beta;
        if direction.amax() == 0.0 {
            converged = true;
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-10 {
            let cand = evaluate(data, &cur.beta + alpha * &direction, lambda, tuning, Some(cur.s))?;
            if cand.objective <= cur.objective {
                accepted = Some(cand);
                break;
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            converged = true;
            break;
        };
        let rel = (cur.objective - next.objective) / cur.objective.max(f64::MIN_POSITIVE);
        let step = (alpha * &direction).amax();
        let scale = 1.0 + next.beta.amax();
        cur = next;
        trace.push(cur.objective);
        if rel < options.tol && step <= options.beta_tol * scale {
            converged = true;
            break;
        }
    }
    Ok(PilotResult {
        beta: cur.beta,
        s: cur.s,
        lambda_ridge: lambda,
        objective: cur.objective,
        trace,
        converged,
    })
}

/// Minimizes `s²(y − Xβ) + λ‖β‖₂²` from the zero vector (or `init`) and
/// `options.starts − 1` elemental starts.
pub fn fit_s_ridge(
    data: &Dataset,
    lambda_ridge: f64,
    tuning: &TuningPair,
    init: Option<&DVector<f64>>,
    options: &SolverOptions,
) -> Result<PilotResult> {
    if !(lambda_ridge.is_finite() && lambda_ridge >= 0.0) {
        return invalid_param(format!("ridge penalty must be nonnegative, got {lambda_ridge}"));
    }
    tuning.validate()?;
    options.validate()?;
    let mut starts = vec![init.cloned().unwrap_or_else(|| DVector::zeros(data.p()))];
    starts.extend(elemental_starts(data, options.starts - 1, options.seed));
    let mut best: Option<PilotResult> = None;
    let mut first_error = None;
    for b0 in starts {
        match irwls(data, lambda_ridge, tuning, b0, options) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
                    best = Some(fit);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_error.unwrap_or_else(|| Error::SolverDivergence("no start succeeded".into())))
}

/// `κ · 10^k` for `k` evenly spaced from 1 down to −4, where `κ` is the mean
/// squared entry of `X`, so the grid follows the scale of the design.
pub fn default_pilot_grid(data: &Dataset) -> Vec<f64> {
    let kappa = data.x().norm_squared() / (data.n() * data.p()) as f64;
    let kappa = if kappa > 0.0 { kappa } else { 1.0 };
    (0..PILOT_GRID_LEN)
        .map(|k| kappa * 10f64.powf(1.0 - 5.0 * k as f64 / (PILOT_GRID_LEN - 1) as f64))
        .collect()
}

/// S-Ridge as a cross-validation [`Estimator`].
#[derive(Debug, Clone, PartialEq)]
pub struct SRidgeEstimator {
    pub tuning: TuningPair,
    pub options: SolverOptions,
}

impl Estimator for SRidgeEstimator {
    fn fit(&self, data: &Dataset, lambda: f64, init: Option<&DVector<f64>>) -> Result<FitResult> {
        let p = fit_s_ridge(data, lambda, &self.tuning, init, &self.options)?;
        Ok(FitResult {
            active_set: active_set(&p.beta),
            beta: p.beta,
            s: p.s,
            tau: 0.0,
            objective: p.objective,
            lambda,
            trace: p.trace,
            converged: p.converged,
            degenerate: p.s == 0.0,
            start: 0,
        })
    }
}

/// Ridge penalty from `grid` minimizing the tau-scale of pooled
/// out-of-fold residuals.
pub fn select_pilot_lambda(
    data: &Dataset,
    grid: &[f64],
    folds: usize,
    seed: u64,
    tuning: &TuningPair,
    options: &SolverOptions,
) -> Result<CvResult> {
    let est = SRidgeEstimator { tuning: *tuning, options: *options };
    cross_validate(data, &est, grid, folds, seed, tuning)
}

/// Cross-validated S-Ridge on the default grid, refitted on all of `data`.
pub fn fit_s_ridge_cv(data: &Dataset, tuning: &TuningPair, options: &SolverOptions, seed: u64) -> Result<(PilotResult, CvResult)> {
    let grid = default_pilot_grid(data);
    let cv = select_pilot_lambda(data, &grid, DEFAULT_FOLDS, seed, tuning, options)?;
    let fit = fit_s_ridge(data, cv.best_lambda, tuning, None, options)?;
    Ok((fit, cv))
}
