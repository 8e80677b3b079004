//! Regularization grids and K-fold cross-validation scored by the tau-scale
//! of pooled out-of-fold residuals.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid_input, invalid_param, Result};
use crate::rho::TuningPair;
use crate::scale::tau_scale;
use crate::solver::{
    fit_adaptive_tau_lasso, fit_tau_lasso, lambda_max, AdaptiveWeights, FitResult, SolverOptions,
};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_N_LAMBDA: usize = 30;
pub const DEFAULT_RATIO: f64 = 1e-3;

/// A procedure that can be fitted at a given penalty level.
pub trait Estimator: Sync {
    fn fit(&self, data: &Dataset, lambda: f64, init: Option<&DVector<f64>>) -> Result<FitResult>;

    /// Fits along `grid` in order, warm-starting each fit from the previous
    /// successful one.
    fn fit_path(&self, data: &Dataset, grid: &[f64]) -> Vec<Result<FitResult>> {
        let mut warm: Option<DVector<f64>> = None;
        grid.iter()
            .map(|&lambda| {
                let fit = self.fit(data, lambda, warm.as_ref());
                if let Ok(f) = &fit {
                    warm = Some(f.beta.clone());
                }
                fit
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauLassoEstimator {
    pub tuning: TuningPair,
    pub options: SolverOptions,
}

impl TauLassoEstimator {
    pub fn lambda_max(&self, data: &Dataset) -> Result<f64> {
        lambda_max(data, &self.tuning)
    }
}

impl Estimator for TauLassoEstimator {
    fn fit(&self, data: &Dataset, lambda: f64, init: Option<&DVector<f64>>) -> Result<FitResult> {
        fit_tau_lasso(data, lambda, &self.tuning, init, &self.options)
    }
}

/// Adaptive tau-Lasso with penalty weights held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveTauLassoEstimator {
    pub tuning: TuningPair,
    pub options: SolverOptions,
    pub weights: AdaptiveWeights,
}

impl AdaptiveTauLassoEstimator {
    /// `λ_max` of the equivalent plain problem on the rescaled columns.
    pub fn lambda_max(&self, data: &Dataset) -> Result<f64> {
        lambda_max(&self.weights.rescale(data)?, &self.tuning)
    }
}

impl Estimator for AdaptiveTauLassoEstimator {
    fn fit(&self, data: &Dataset, lambda: f64, init: Option<&DVector<f64>>) -> Result<FitResult> {
        fit_adaptive_tau_lasso(data, lambda, &self.tuning, &self.weights, init, &self.options)
    }
}

/// `n_lambda` log-spaced values from `lambda_max` down to `ratio · lambda_max`.
pub fn lambda_grid_from_max(lambda_max: f64, n_lambda: usize, ratio: f64) -> Result<Vec<f64>> {
    if n_lambda < 2 {
        return invalid_param(format!("grid needs at least 2 values, got {n_lambda}"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return invalid_param(format!("grid ratio must lie in (0, 1), got {ratio}"));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return invalid_input(format!("lambda_max must be positive, got {lambda_max}"));
    }
    let step = ratio.ln() / (n_lambda - 1) as f64;
    Ok((0..n_lambda)
        .map(|k| lambda_max * (step * k as f64).exp())
        .collect())
}

/// Grid for the tau-Lasso on `data`, topped by [`lambda_max`].
pub fn make_lambda_grid(data: &Dataset, tuning: &TuningPair, n_lambda: usize, ratio: f64) -> Result<Vec<f64>> {
    if n_lambda < 2 {
        return invalid_param(format!("grid needs at least 2 values, got {n_lambda}"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return invalid_param(format!("grid ratio must lie in (0, 1), got {ratio}"));
    }
    lambda_grid_from_max(lambda_max(data, tuning)?, n_lambda, ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda_grid: Vec<f64>,
    /// Tau-scale of the pooled out-of-fold residuals; `+∞` where a fold failed.
    pub cv_scores: Vec<f64>,
    pub best_lambda: f64,
    pub best_index: usize,
    pub fold_assignments: Vec<usize>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Fold label of every observation: a seeded permutation dealt round-robin,
/// so fold sizes differ by at most one.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return invalid_param(format!("need at least 2 folds, got {folds}"));
    }
    if n < folds {
        return invalid_input(format!("{n} observations cannot fill {folds} folds"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % folds;
    }
    Ok(labels)
}

/// Cross-validation criterion: the tau-scale of a residual vector.
pub fn cv_score(residuals: &[f64], tuning: &TuningPair) -> Result<f64> {
    Ok(tau_scale(residuals, tuning)?.tau)
}

pub fn cross_validate<E: Estimator + ?Sized>(
    data: &Dataset,
    estimator: &E,
    grid: &[f64],
    folds: usize,
    seed: u64,
    tuning: &TuningPair,
) -> Result<CvResult> {
    if grid.is_empty() {
        return invalid_param("lambda grid is empty");
    }
    let labels = assign_folds(data.n(), folds, seed)?;
    let n = data.n();
    let mut pooled = vec![vec![0.0; n]; grid.len()];
    let mut failed = vec![false; grid.len()];
    let mut warnings = Vec::new();

    for k in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| labels[i] != k).collect();
        let test: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
        let train_data = data.subset(&train);
        for (l, fit) in estimator.fit_path(&train_data, grid).into_iter().enumerate() {
            match fit {
                Ok(f) => {
                    for &i in &test {
                        pooled[l][i] = data.y()[i] - data.x().row(i).transpose().dot(&f.beta);
                    }
                }
                Err(e) => {
                    failed[l] = true;
                    warnings.push(format!("fold {k}, lambda {:e}: {e}", grid[l]));
                }
            }
        }
    }

    let mut cv_scores = Vec::with_capacity(grid.len());
    for (l, r) in pooled.iter().enumerate() {
        let score = if failed[l] {
            f64::INFINITY
        } else {
            match cv_score(r, tuning) {
                Ok(v) => v,
                Err(e) => {
                    warnings.push(format!("lambda {:e}: {e}", grid[l]));
                    f64::INFINITY
                }
            }
        };
        cv_scores.push(score);
    }

    let mut best_index = 0;
    for l in 1..grid.len() {
        let (a, b) = (cv_scores[l], cv_scores[best_index]);
        if a < b || (a == b && grid[l] > grid[best_index]) {
            best_index = l;
        }
    }
    if cv_scores[best_index].is_infinite() {
        warnings.push("every grid value failed".into());
    }
    Ok(CvResult {
        lambda_grid: grid.to_vec(),
        best_lambda: grid[best_index],
        best_index,
        cv_scores,
        fold_assignments: labels,
        seed,
        warnings,
    })
}
