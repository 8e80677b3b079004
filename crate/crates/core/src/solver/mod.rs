//! tau-Lasso and adaptive tau-Lasso fits by iteratively reweighted lasso steps.
//!
//! At the current coefficients the residual M-scale `s`, the weight `W̄` and
//! the observation weights `ω_i = ψ(t_i)/t_i` with `ψ = W̄ψ0 + ψ1` are formed.
//! The weighted lasso `(1/(2n)) Σ ω_i r_i² + λ‖β‖₁` has the same gradient in
//! its smooth part as `τ²(r(β))` at that point, since
//! `∇τ² = −(s/n) Σ ψ(t_i) x_i = −(1/n) Σ ω_i r_i x_i`. Its minimizer gives a
//! search direction, and a step-halving line search on the true objective
//! keeps the iterates monotone.

mod adaptive;
mod cd;
mod starts;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::rho::TuningPair;
use crate::scale::{combined_psi_weight, tau_scale, tau_scale_with_hint};

pub use adaptive::{fit_adaptive_tau_lasso, AdaptiveWeights};
pub(crate) use starts::elemental_starts;

/// Knobs of the iterative solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Number of starting points: the supplied (or zero) start plus
    /// `starts − 1` elemental subsample fits.
    pub starts: usize,
    pub max_iter: usize,
    /// Relative objective change below which iteration may stop.
    pub tol: f64,
    /// Coefficient step (relative to `1 + ‖β‖∞`) below which iteration may stop.
    pub beta_tol: f64,
    pub inner_tol: f64,
    pub max_inner_sweeps: usize,
    /// With several starts, each runs at most this many iterations before the
    /// `keep_best` lowest objectives are iterated to convergence.
    pub screen_iter: usize,
    pub keep_best: usize,
    /// Seed for the elemental subsamples.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            max_iter: 500,
            tol: 1e-8,
            beta_tol: 1e-6,
            inner_tol: 1e-10,
            max_inner_sweeps: 200,
            screen_iter: 10,
            keep_best: 2,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return invalid_param("starts must be at least 1");
        }
        if self.keep_best == 0 || self.screen_iter == 0 {
            return invalid_param("screen_iter and keep_best must be at least 1");
        }
        if self.max_iter == 0 {
            return invalid_param("max_iter must be at least 1");
        }
        for (name, v) in [("tol", self.tol), ("beta_tol", self.beta_tol), ("inner_tol", self.inner_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid_param(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Settings for refits that must be accurate to many digits, such as
    /// sensitivity curves.
    pub fn precise() -> Self {
        Self {
            starts: 1,
            max_iter: 5000,
            tol: 1e-15,
            beta_tol: 1e-11,
            inner_tol: 1e-13,
            max_inner_sweeps: 10_000,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: DVector<f64>,
    pub s: f64,
    pub tau: f64,
    /// `τ² + λ Σ w_j |β_j|` at `beta`.
    pub objective: f64,
    pub lambda: f64,
    pub active_set: Vec<usize>,
    /// Objective after every accepted iteration, starting at the initial point.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Exact fit: the residual M-scale collapsed to zero.
    pub degenerate: bool,
    /// Index of the start that produced this fit.
    pub start: usize,
}

impl FitResult {
    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.beta
    }
}

pub(crate) fn active_set(beta: &DVector<f64>) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j] != 0.0).collect()
}

pub(crate) fn weighted_l1(beta: &DVector<f64>, weights: Option<&[f64]>) -> f64 {
    match weights {
        None => beta.iter().map(|b| b.abs()).sum(),
        Some(w) => beta
            .iter()
            .zip(w)
            .filter(|(b, _)| **b != 0.0)
            .map(|(b, w)| w * b.abs())
            .sum(),
    }
}

fn check_shapes(data: &Dataset, beta: &DVector<f64>, weights: Option<&[f64]>) -> Result<()> {
    if beta.len() != data.p() {
        return invalid_input(format!(
            "coefficient vector has length {}, design has {} columns",
            beta.len(),
            data.p()
        ));
    }
    if let Some(w) = weights {
        if w.len() != data.p() {
            return invalid_input(format!("{} penalty weights for {} columns", w.len(), data.p()));
        }
    }
    Ok(())
}

/// `τ²(y − Xβ) + λ Σ w_j |β_j|`, with unit weights when `weights` is `None`.
///
/// An infinite weight marks a column removed from the model; it contributes
/// nothing while its coefficient is zero.
pub fn objective(
    data: &Dataset,
    beta: &DVector<f64>,
    lambda: f64,
    tuning: &TuningPair,
    weights: Option<&[f64]>,
) -> Result<f64> {
    check_shapes(data, beta, weights)?;
    let r = data.residuals(beta);
    let tau = tau_scale(r.as_slice(), tuning)?.tau;
    Ok(tau * tau + lambda * weighted_l1(beta, weights))
}

/// Smallest `λ` for which `β = 0` satisfies the stationarity condition:
/// `max_j |(s/n) Σ ψ(y_i/s) x_ij|` with `s` the M-scale of `y`.
pub fn lambda_max(data: &Dataset, tuning: &TuningPair) -> Result<f64> {
    let y = data.y().as_slice();
    let s = tau_scale(y, tuning)?.s;
    if s == 0.0 {
        return invalid_input("response is degenerate (zero M-scale); no regularization path exists");
    }
    let g = tau_gradient(data, &DVector::zeros(data.p()), s, tuning)?;
    Ok(g.amax())
}

/// Observation weights `ω_i = W̄ w0(t_i) + w1(t_i)`; `W̄ = 0` when the
/// weight denominator vanishes.
fn observation_weights(r: &[f64], s: f64, tuning: &TuningPair) -> Result<Vec<f64>> {
    let wbar = match combined_psi_weight(r, s, tuning) {
        Ok(w) => w,
        Err(Error::DegenerateWeight { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    let (rho0, rho1) = (tuning.rho0(), tuning.rho1());
    Ok(r
        .iter()
        .map(|&v| {
            let t = v / s;
            wbar * rho0.weight(t) + rho1.weight(t)
        })
        .collect())
}

/// `∇_β τ²(y − Xβ) = −(s/n) Σ ψ(t_i) x_i`, given the M-scale `s` at `beta`.
pub fn tau_gradient(data: &Dataset, beta: &DVector<f64>, s: f64, tuning: &TuningPair) -> Result<DVector<f64>> {
    let r = data.residuals(beta);
    let omega = observation_weights(r.as_slice(), s, tuning)?;
    let n = data.n() as f64;
    // s ψ(t_i) = ω_i r_i
    let v = DVector::from_fn(data.n(), |i, _| omega[i] * r[i]);
    Ok(-(data.x().transpose() * v) / n)
}

/// Worst violation of the lasso subgradient condition at `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity {
    pub max_violation: f64,
    pub gradient_inf_norm: f64,
}

impl Stationarity {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol * (1.0 + self.gradient_inf_norm)
    }
}

/// For each `j`: `|g_j| ≤ λw_j` when `β_j = 0`, else `g_j + λw_j sign(β_j) = 0`,
/// with `g = ∇τ²`. Columns with infinite weight are skipped.
pub fn stationarity(
    data: &Dataset,
    beta: &DVector<f64>,
    lambda: f64,
    tuning: &TuningPair,
    weights: Option<&[f64]>,
) -> Result<Stationarity> {
    check_shapes(data, beta, weights)?;
    let r = data.residuals(beta);
    let s = tau_scale(r.as_slice(), tuning)?.s;
    if s == 0.0 {
        return Ok(Stationarity { max_violation: 0.0, gradient_inf_norm: 0.0 });
    }
    let g = tau_gradient(data, beta, s, tuning)?;
    let mut worst = 0.0_f64;
    for j in 0..beta.len() {
        let w = weights.map_or(1.0, |w| w[j]);
        if w.is_infinite() {
            continue;
        }
        let v = if beta[j] == 0.0 {
            (g[j].abs() - lambda * w).max(0.0)
        } else {
            (g[j] + lambda * w * beta[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    Ok(Stationarity { max_violation: worst, gradient_inf_norm: g.amax() })
}

/// Minimizes `τ²(y − Xβ) + λ‖β‖₁`.
///
/// Runs from `init` (zero when absent) and from `options.starts − 1`
/// elemental starts, returning the lowest objective; ties go to the lowest
/// start index. With more than `keep_best` starts, all are first run for
/// `screen_iter` iterations and only the best are continued.
pub fn fit_tau_lasso(
    data: &Dataset,
    lambda: f64,
    tuning: &TuningPair,
    init: Option<&DVector<f64>>,
    options: &SolverOptions,
) -> Result<FitResult> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return invalid_param(format!("lambda must be nonnegative, got {lambda}"));
    }
    tuning.validate()?;
    options.validate()?;
    let first = match init {
        Some(b) => {
            check_shapes(data, b, None)?;
            b.clone()
        }
        None => DVector::zeros(data.p()),
    };
    let mut starting_points = vec![first];
    starting_points.extend(elemental_starts(data, options.starts - 1, options.seed));

    let screened = starting_points.len() > options.keep_best && options.screen_iter < options.max_iter;
    let first_pass = if screened {
        SolverOptions { max_iter: options.screen_iter, ..*options }
    } else {
        *options
    };
    let mut candidates = Vec::new();
    let mut first_error = None;
    for (k, b0) in starting_points.into_iter().enumerate() {
        match irwls(data, lambda, tuning, b0, &first_pass) {
            Ok(mut fit) => {
                fit.start = k;
                candidates.push(fit);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if screened {
        // stable sort keeps the lowest start index first among ties
        candidates.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        candidates.truncate(options.keep_best);
        let mut refined = Vec::with_capacity(candidates.len());
        for c in candidates {
            if c.converged {
                refined.push(c);
                continue;
            }
            match irwls(data, lambda, tuning, c.beta.clone(), options) {
                Ok(mut fit) => {
                    let mut trace = c.trace;
                    trace.extend_from_slice(&fit.trace[1..]);
                    fit.trace = trace;
                    fit.start = c.start;
                    refined.push(fit);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        candidates = refined;
    }
    let mut best: Option<FitResult> = None;
    for fit in candidates {
        if best.as_ref().is_none_or(|b| fit.objective < b.objective || (fit.objective == b.objective && fit.start < b.start)) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| first_error.unwrap_or_else(|| Error::SolverDivergence("no start succeeded".into())))
}

struct Point {
    beta: DVector<f64>,
    s: f64,
    tau: f64,
    objective: f64,
}

fn evaluate(data: &Dataset, beta: DVector<f64>, lambda: f64, tuning: &TuningPair, hint: Option<f64>) -> Result<Point> {
    let r = data.residuals(&beta);
    let est = tau_scale_with_hint(r.as_slice(), tuning, hint)?;
    let objective = est.tau * est.tau + lambda * weighted_l1(&beta, None);
    if !objective.is_finite() {
        return Err(Error::SolverDivergence(format!("objective became {objective}")));
    }
    Ok(Point { beta, s: est.s, tau: est.tau, objective })
}

fn irwls(
    data: &Dataset,
    lambda: f64,
    tuning: &TuningPair,
    beta0: DVector<f64>,
    options: &SolverOptions,
) -> Result<FitResult> {
    let mut cur = evaluate(data, beta0, lambda, tuning, None)?;
    let mut trace = vec![cur.objective];
    let mut converged = false;
    let mut degenerate = false;

    for _ in 0..options.max_iter {
        if cur.s == 0.0 {
            degenerate = true;
            converged = true;
            break;
        }
        let r = data.residuals(&cur.beta);
        let omega = observation_weights(r.as_slice(), cur.s, tuning)?;
        if omega.iter().all(|w| *w == 0.0) {
            return Err(Error::SolverDivergence(
                "all observation weights vanished".into(),
            ));
        }
        let mut target = cur.beta.clone();
        cd::WeightedLasso::new(data.x(), data.y(), &omega, lambda).solve(
            &mut target,
            options.inner_tol,
            options.max_inner_sweeps,
        );
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
            // no descent along the surrogate direction: stationary to working precision
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

    Ok(FitResult {
        active_set: active_set(&cur.beta),
        beta: cur.beta,
        s: cur.s,
        tau: cur.tau,
        objective: cur.objective,
        lambda,
        trace,
        converged,
        degenerate,
        start: 0,
    })
}
