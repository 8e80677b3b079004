//! Standardize, select λ by cross-validation, fit and map back to the
//! original scale.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use taulasso::pilot::fit_s_ridge_cv;
use taulasso::selection::{
    cross_validate, lambda_grid_from_max, AdaptiveTauLassoEstimator, CvResult, Estimator, TauLassoEstimator,
    DEFAULT_FOLDS, DEFAULT_N_LAMBDA, DEFAULT_RATIO,
};
use taulasso::{fit_tau_lasso, standardize, AdaptiveWeights, Dataset, SolverOptions, StandardizationMap, TuningPair};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    TauLasso,
    AdaptiveTauLasso,
    /// Unpenalized tau fit restricted to the true support.
    Oracle,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::TauLasso => "tau-lasso",
            EstimatorKind::AdaptiveTauLasso => "adaptive-tau-lasso",
            EstimatorKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tau-lasso" => Ok(EstimatorKind::TauLasso),
            "adaptive-tau-lasso" | "adaptive" => Ok(EstimatorKind::AdaptiveTauLasso),
            "oracle" => Ok(EstimatorKind::Oracle),
            _ => Err(BenchError::InvalidSpec(format!("unknown estimator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tuning: TuningPair,
    pub options: SolverOptions,
    pub folds: usize,
    pub n_lambda: usize,
    pub lambda_ratio: f64,
    pub gamma: f64,
    pub epsilon_floor: f64,
    pub standardize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tuning: TuningPair::default(),
            options: SolverOptions::default(),
            folds: DEFAULT_FOLDS,
            n_lambda: DEFAULT_N_LAMBDA,
            lambda_ratio: DEFAULT_RATIO,
            gamma: 1.0,
            epsilon_floor: 0.0,
            standardize: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.tuning.validate()?;
        self.options.validate()?;
        if self.folds < 2 {
            return Err(BenchError::InvalidSpec(format!("need at least 2 folds, got {}", self.folds)));
        }
        lambda_grid_from_max(1.0, self.n_lambda, self.lambda_ratio)?;
        if !(self.gamma > 0.0) || !(self.epsilon_floor >= 0.0) {
            return Err(BenchError::InvalidSpec("gamma must be positive and epsilon_floor nonnegative".into()));
        }
        Ok(())
    }
}

/// A fitted model on the original scale, `ŷ = intercept + xᵀβ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineFit {
    pub estimator: EstimatorKind,
    pub beta: DVector<f64>,
    pub intercept: f64,
    /// Penalty on the standardized problem.
    pub lambda: f64,
    pub s: f64,
    pub tau: f64,
    pub pilot_lambda: Option<f64>,
    pub cv: Option<CvResult>,
    pub warnings: Vec<String>,
}

/// Standardized data and the map back, or the data as-is.
pub struct Prepared {
    pub data: Dataset,
    pub map: Option<StandardizationMap>,
}

impl Prepared {
    pub fn new(train: &Dataset, config: &PipelineConfig) -> Result<Self> {
        if config.standardize {
            let (data, map) = standardize(train)?;
            Ok(Self { data, map: Some(map) })
        } else {
            Ok(Self { data: train.clone(), map: None })
        }
    }

    /// Original-scale coefficients and intercept.
    pub fn map_back(&self, beta_std: &DVector<f64>) -> (DVector<f64>, f64) {
        match &self.map {
            Some(m) => {
                let beta = m.destandardize_coefficients(beta_std);
                let b0 = m.intercept(&beta);
                (beta, b0)
            }
            None => (beta_std.clone(), 0.0),
        }
    }
}

/// Adaptive weights from a cross-validated S-Ridge pilot.
pub fn pilot_weights(data: &Dataset, config: &PipelineConfig, seed: u64) -> Result<(AdaptiveWeights, f64)> {
    let (pilot, cv) = fit_s_ridge_cv(data, &config.tuning, &config.options, seed)?;
    let weights = AdaptiveWeights::from_pilot(&pilot.beta, config.gamma, config.epsilon_floor)?;
    Ok((weights, cv.best_lambda))
}

fn select_and_fit<E: Estimator>(
    data: &Dataset,
    est: &E,
    lambda_max: f64,
    config: &PipelineConfig,
    seed: u64,
) -> Result<(taulasso::FitResult, CvResult)> {
    let grid = lambda_grid_from_max(lambda_max, config.n_lambda, config.lambda_ratio)?;
    let cv = cross_validate(data, est, &grid, config.folds, seed, &config.tuning)?;
    let fit = est.fit(data, cv.best_lambda, None)?;
    Ok((fit, cv))
}

/// Full pipeline with cross-validated λ. `beta0` is only read by the oracle.
pub fn fit_pipeline(
    train: &Dataset,
    kind: EstimatorKind,
    beta0: &[f64],
    config: &PipelineConfig,
    seed: u64,
) -> Result<PipelineFit> {
    config.validate()?;
    let prep = Prepared::new(train, config)?;
    let data = &prep.data;
    let (fit, cv, pilot_lambda) = match kind {
        EstimatorKind::TauLasso => {
            let est = TauLassoEstimator { tuning: config.tuning, options: config.options };
            let lmax = est.lambda_max(data)?;
            let (fit, cv) = select_and_fit(data, &est, lmax, config, seed)?;
            (fit, Some(cv), None)
        }
        EstimatorKind::AdaptiveTauLasso => {
            let (weights, pl) = pilot_weights(data, config, seed)?;
            let est = AdaptiveTauLassoEstimator { tuning: config.tuning, options: config.options, weights };
            let lmax = est.lambda_max(data)?;
            let (fit, cv) = select_and_fit(data, &est, lmax, config, seed.wrapping_add(1))?;
            (fit, Some(cv), Some(pl))
        }
        EstimatorKind::Oracle => {
            if beta0.len() != data.p() {
                return Err(BenchError::InvalidSpec("oracle needs the true coefficients".into()));
            }
            let support: Vec<usize> = (0..data.p()).filter(|&j| beta0[j] != 0.0).collect();
            let sub = data.select_columns(&support);
            let f = fit_tau_lasso(&sub, 0.0, &config.tuning, None, &config.options)?;
            let mut beta = DVector::zeros(data.p());
            for (k, &j) in support.iter().enumerate() {
                beta[j] = f.beta[k];
            }
            let fit = taulasso::FitResult { beta, active_set: support, ..f };
            (fit, None, None)
        }
    };
    let (beta, intercept) = prep.map_back(&fit.beta);
    let warnings = cv.as_ref().map(|c| c.warnings.clone()).unwrap_or_default();
    Ok(PipelineFit {
        estimator: kind,
        beta,
        intercept,
        lambda: fit.lambda,
        s: fit.s,
        tau: fit.tau,
        pilot_lambda,
        cv,
        warnings,
    })
}
