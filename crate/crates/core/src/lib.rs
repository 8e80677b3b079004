//! Robust sparse linear regression with tau-scales.
//!
//! The crate provides the tau-Lasso and adaptive tau-Lasso estimators, the
//! bisquare ρ machinery and M/tau scales they are built on, an S-Ridge pilot,
//! robust standardization, cross-validated model selection and closed-form
//! influence functions.

pub mod data;
pub mod error;
pub mod influence;
pub mod pilot;
pub mod preprocessing;
pub mod quadrature;
pub mod rho;
pub mod scale;
pub mod selection;
pub mod solver;
pub mod stats;

pub use data::Dataset;
pub use error::{Error, Result};
pub use influence::{
    if_adaptive_tau_lasso, if_tau_lasso, sensitivity_curve, ExpectationEngine, FunctionalValue, InfluenceReport,
};
pub use pilot::{fit_s_ridge, fit_s_ridge_cv, PilotKind, PilotResult};
pub use preprocessing::{destandardize_coefficients, standardize, StandardizationMap};
pub use rho::{Bisquare, TuningPair};
pub use selection::{
    cross_validate, make_lambda_grid, AdaptiveTauLassoEstimator, CvResult, Estimator, TauLassoEstimator,
};
pub use scale::{combined_psi_weight, m_scale, tau_scale, ScaleEstimate};
pub use solver::{
    fit_adaptive_tau_lasso, fit_tau_lasso, lambda_max, objective, AdaptiveWeights, FitResult, SolverOptions,
};
