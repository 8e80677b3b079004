use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{active_set, fit_tau_lasso, FitResult, SolverOptions};
use crate::data::Dataset;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::rho::TuningPair;

/// Penalty weights `w_j = 1 / max(ε, |β̃_j|)^γ` built from a pilot `β̃`.
///
/// With `ε = 0` a zero pilot entry yields `w_j = ∞`: the column is removed
/// and its coefficient pinned at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveWeights {
    pub w: Vec<f64>,
    pub gamma: f64,
    pub epsilon_floor: f64,
}

impl AdaptiveWeights {
    pub fn from_pilot(pilot: &DVector<f64>, gamma: f64, epsilon_floor: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return invalid_param(format!("gamma must be positive, got {gamma}"));
        }
        if !(epsilon_floor.is_finite() && epsilon_floor >= 0.0) {
            return invalid_param(format!("epsilon floor must be nonnegative, got {epsilon_floor}"));
        }
        if let Some(j) = pilot.iter().position(|v| !v.is_finite()) {
            return invalid_input(format!("pilot entry {j} is not finite"));
        }
        let w: Vec<f64> = pilot
            .iter()
            .map(|b| {
                let m = b.abs().max(epsilon_floor);
                if m == 0.0 {
                    f64::INFINITY
                } else {
                    m.powf(-gamma)
                }
            })
            .collect();
        if w.iter().all(|v| v.is_infinite()) {
            return Err(Error::DegeneratePilot(
                "every pilot coefficient is zero and no epsilon floor is set".into(),
            ));
        }
        Ok(Self { w, gamma, epsilon_floor })
    }

    /// Columns that stay in the model.
    pub fn kept(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&j| self.w[j].is_finite()).collect()
    }

    /// Design with dropped columns removed and the rest divided by `w_j`.
    pub fn rescale(&self, data: &Dataset) -> Result<Dataset> {
        if self.w.len() != data.p() {
            return invalid_input(format!("{} weights for {} columns", self.w.len(), data.p()));
        }
        let kept = self.kept();
        let mut x = data.x().select_columns(&kept);
        for (k, &j) in kept.iter().enumerate() {
            x.column_mut(k).unscale_mut(self.w[j]);
        }
        Dataset::new(data.y().clone(), x)
    }

    /// Original-coordinate coefficients `β_j = β̂_j / w_j` (zero for dropped columns).
    pub fn map_back(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut beta = DVector::zeros(self.w.len());
        for (k, j) in self.kept().into_iter().enumerate() {
            beta[j] = reduced[k] / self.w[j];
        }
        beta
    }

    /// Inverse of [`map_back`](Self::map_back) on the kept columns.
    pub fn map_forward(&self, beta: &DVector<f64>) -> DVector<f64> {
        let kept = self.kept();
        DVector::from_fn(kept.len(), |k, _| beta[kept[k]] * self.w[kept[k]])
    }
}

/// Minimizes `τ²(y − Xβ) + λ Σ w_j |β_j|` through the equivalent plain
/// tau-Lasso on the columns `x_j / w_j`.
pub fn fit_adaptive_tau_lasso(
    data: &Dataset,
    lambda: f64,
    tuning: &TuningPair,
    weights: &AdaptiveWeights,
    init: Option<&DVector<f64>>,
    options: &SolverOptions,
) -> Result<FitResult> {
    let reduced = weights.rescale(data)?;
    let init = match init {
        Some(b) if b.len() != data.p() => {
            return invalid_input(format!("initial vector has length {}, expected {}", b.len(), data.p()))
        }
        Some(b) => Some(weights.map_forward(b)),
        None => None,
    };
    let fit = fit_tau_lasso(&reduced, lambda, tuning, init.as_ref(), options)?;
    let beta = weights.map_back(&fit.beta);
    Ok(FitResult {
        active_set: active_set(&beta),
        beta,
        ..fit
    })
}
