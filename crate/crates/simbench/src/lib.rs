//! Simulation harness for the tau-Lasso estimators: scenario generators,
//! contamination, metrics, the fitting pipeline and experiment drivers.

pub mod contamination;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod scenario;

pub use contamination::{ContaminationPlan, RowPlacement};
pub use error::{BenchError, Result};
pub use experiments::{
    run_breakdown_curve, run_gross_breakdown, run_if_validation, run_overshrinkage, run_table_experiment,
    BreakdownConfig, GrossBreakdownConfig, IfConfig, OvershrinkConfig, Stat, TableConfig,
};
pub use metrics::{score, MetricsRecord};
pub use pipeline::{fit_pipeline, EstimatorKind, PipelineConfig, PipelineFit};
pub use scenario::{generate, ErrorLaw, ScenarioSpec};
