//! Monte-Carlo experiment drivers. Trials run in parallel, each with its own
//! ChaCha8 stream, and are collected in trial order so reports do not depend
//! on the thread count.

use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use taulasso::influence::{theta, AdaptiveTauLassoInfluence, ExpectationEngine, FunctionalValue, InfluenceReport, TauLassoInfluence};
use taulasso::selection::{lambda_grid_from_max, AdaptiveTauLassoEstimator, Estimator, TauLassoEstimator};
use taulasso::stats::mean_and_se;
use taulasso::{fit_adaptive_tau_lasso, fit_tau_lasso, lambda_max, AdaptiveWeights, Dataset, FitResult, SolverOptions, TuningPair};

use crate::contamination::ContaminationPlan;
use crate::error::{BenchError, Result};
use crate::metrics::{score, MetricsRecord};
use crate::pipeline::{fit_pipeline, pilot_weights, EstimatorKind, PipelineConfig, Prepared};
use crate::scenario::{generate, CorrelationBlock, ErrorLaw, ScenarioSpec};

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mean with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, se: f64::NAN, count: 0 };
        }
        let (mean, se) = mean_and_se(values);
        Self { mean, se, count: values.len() }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(BenchError::InvalidSpec("trials must be at least 1".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------- tables

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub scenarios: Vec<ScenarioSpec>,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    pub contamination: Option<ContaminationPlan>,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: String,
    pub error_law: ErrorLaw,
    pub estimator: EstimatorKind,
    pub trial: usize,
    pub metrics: Option<MetricsRecord>,
    pub lambda: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub error_law: ErrorLaw,
    pub contaminated: bool,
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub failed: usize,
    pub rmse: Stat,
    pub mad: Stat,
    pub fnr: Stat,
    pub fpr: Stat,
    pub cer: Stat,
}

impl CellSummary {
    pub fn metric(&self, name: &str) -> Option<Stat> {
        match name {
            "rmse" => Some(self.rmse),
            "mad" => Some(self.mad),
            "fnr" => Some(self.fnr),
            "fpr" => Some(self.fpr),
            "cer" => Some(self.cer),
            _ => None,
        }
    }

    fn from_records(records: &[&TrialRecord], contaminated: bool) -> Self {
        let ok: Vec<&MetricsRecord> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
        let col = |f: fn(&MetricsRecord) -> f64| Stat::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
        let first = records[0];
        Self {
            scenario: first.scenario.clone(),
            error_law: first.error_law,
            contaminated,
            estimator: first.estimator,
            trials: records.len(),
            failed: records.len() - ok.len(),
            rmse: col(|m| m.rmse),
            mad: col(|m| m.mad),
            fnr: col(|m| m.fnr),
            fpr: col(|m| m.fpr),
            cer: col(|m| m.cer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub config: TableConfig,
    pub cells: Vec<CellSummary>,
    pub records: Vec<TrialRecord>,
}

impl TableReport {
    pub fn cell(&self, scenario: &str, estimator: EstimatorKind) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.scenario == scenario && c.estimator == estimator)
    }

    pub fn failed_fraction(&self) -> f64 {
        let failed = self.records.iter().filter(|r| r.metrics.is_none()).count();
        failed as f64 / self.records.len().max(1) as f64
    }
}

fn fit_and_score(train: &Dataset, test: &Dataset, kind: EstimatorKind, spec: &ScenarioSpec, cfg: &PipelineConfig, seed: u64) -> Result<(MetricsRecord, f64)> {
    let fit = fit_pipeline(train, kind, &spec.beta0, cfg, seed)?;
    Ok((score(&fit.beta, fit.intercept, &spec.beta0, test)?, fit.lambda))
}

/// Prediction and selection metrics over `trials` samples per scenario, with
/// every estimator fitted to the same samples.
pub fn run_table_experiment(config: &TableConfig) -> Result<TableReport> {
    check_trials(config.trials)?;
    config.pipeline.validate()?;
    if config.estimators.is_empty() || config.scenarios.is_empty() {
        return Err(BenchError::InvalidSpec("need at least one scenario and one estimator".into()));
    }
    for s in &config.scenarios {
        s.validate()?;
    }
    if let Some(plan) = &config.contamination {
        plan.validate()?;
    }
    let mut records = Vec::new();
    for (si, spec) in config.scenarios.iter().enumerate() {
        let leverage = match &config.contamination {
            Some(plan) => plan.fixed_leverage(spec.n, spec.p(), &mut stream_rng(config.seed, u64::MAX - si as u64))?,
            None => None,
        };
        let per_trial: Vec<Vec<TrialRecord>> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(config.seed, ((si as u64) << 32) | t as u64);
                let record = |kind: EstimatorKind, out: Result<(MetricsRecord, f64)>| match out {
                    Ok((m, l)) => TrialRecord {
                        scenario: spec.name.clone(),
                        error_law: spec.error_law,
                        estimator: kind,
                        trial: t,
                        metrics: Some(m),
                        lambda: Some(l),
                        error: None,
                    },
                    Err(e) => TrialRecord {
                        scenario: spec.name.clone(),
                        error_law: spec.error_law,
                        estimator: kind,
                        trial: t,
                        metrics: None,
                        lambda: None,
                        error: Some(e.to_string()),
                    },
                };
                let prepared = generate(spec, &mut rng).and_then(|s| {
                    let train = match &config.contamination {
                        Some(plan) => plan.apply(&s.train, leverage.as_ref(), &mut rng)?.0,
                        None => s.train,
                    };
                    Ok((train, s.test))
                });
                let cv_seed = rng.next_u64();
                config
                    .estimators
                    .iter()
                    .map(|&kind| match &prepared {
                        Ok((train, test)) => record(kind, fit_and_score(train, test, kind, spec, &config.pipeline, cv_seed)),
                        Err(e) => record(kind, Err(BenchError::InvalidSpec(e.to_string()))),
                    })
                    .collect()
            })
            .collect();
        records.extend(per_trial.into_iter().flatten());
    }
    let mut cells = Vec::new();
    for spec in &config.scenarios {
        for &kind in &config.estimators {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.scenario == spec.name && r.estimator == kind).collect();
            cells.push(CellSummary::from_records(&rs, config.contamination.is_some()));
        }
    }
    Ok(TableReport { config: config.clone(), cells, records })
}

// ------------------------------------------------------- breakdown curve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownConfig {
    pub scenario: ScenarioSpec,
    pub ystar_grid: Vec<f64>,
    pub fraction: f64,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ystar: f64,
    pub estimator: EstimatorKind,
    pub rmse: Stat,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub config: BreakdownConfig,
    pub points: Vec<CurvePoint>,
}

impl BreakdownReport {
    pub fn rmse_at(&self, ystar: f64, estimator: EstimatorKind) -> Option<Stat> {
        self.points.iter().find(|p| p.ystar == ystar && p.estimator == estimator).map(|p| p.rmse)
    }
}

/// RMSE against outlier magnitude `y★` with the pattern contamination; each
/// trial reuses one clean sample across the grid.
pub fn run_breakdown_curve(config: &BreakdownConfig) -> Result<BreakdownReport> {
    check_trials(config.trials)?;
    config.pipeline.validate()?;
    config.scenario.validate()?;
    if config.ystar_grid.is_empty() {
        return Err(BenchError::InvalidSpec("ystar grid is empty".into()));
    }
    let spec = &config.scenario;
    let ne = config.estimators.len();
    let ng = config.ystar_grid.len();
    // [trial][grid][estimator]
    let results: Vec<Vec<Vec<Option<f64>>>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(config.seed, t as u64);
            let sample = generate(spec, &mut rng);
            let cv_seed = rng.next_u64();
            config
                .ystar_grid
                .iter()
                .map(|&ystar| {
                    config
                        .estimators
                        .iter()
                        .map(|&kind| {
                            let s = sample.as_ref().ok()?;
                            let plan = ContaminationPlan::Pattern { fraction: config.fraction, ystar };
                            let (train, _) = plan.apply(&s.train, None, &mut rng).ok()?;
                            fit_and_score(&train, &s.test, kind, spec, &config.pipeline, cv_seed).ok().map(|(m, _)| m.rmse)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(ng * ne);
    for (g, &ystar) in config.ystar_grid.iter().enumerate() {
        for (e, &kind) in config.estimators.iter().enumerate() {
            let vals: Vec<f64> = results.iter().filter_map(|r| r[g][e]).collect();
            points.push(CurvePoint { ystar, estimator: kind, rmse: Stat::of(&vals), failed: config.trials - vals.len() });
        }
    }
    Ok(BreakdownReport { config: config.clone(), points })
}

/// Parses `lo:hi:logN` or `lo:hi:N` into a log- or linearly spaced grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || BenchError::InvalidSpec(format!("grid '{spec}' is not of the form lo:hi:N or lo:hi:logN"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let (log, count) = match parts[2].strip_prefix("log") {
        Some(c) => (true, c),
        None => (false, parts[2]),
    };
    let k: usize = count.parse().map_err(|_| bad())?;
    if k < 2 || !(lo < hi) || (log && lo <= 0.0) {
        return Err(bad());
    }
    Ok((0..k)
        .map(|i| {
            let f = i as f64 / (k - 1) as f64;
            if log {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect())
}

// ------------------------------------------------- empirical breakdown

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrossBreakdownConfig {
    pub scenario: ScenarioSpec,
    pub fraction: f64,
    pub magnitude: f64,
    pub seeds: usize,
    pub estimator: EstimatorKind,
    pub bound_factor: f64,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrossBreakdownRow {
    pub trial: usize,
    pub clean_norm: Option<f64>,
    pub contaminated_norm: Option<f64>,
}

impl GrossBreakdownRow {
    /// `None` when either fit failed.
    pub fn within(&self, factor: f64) -> Option<bool> {
        Some(self.contaminated_norm? <= factor * self.clean_norm?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrossBreakdownReport {
    pub config: GrossBreakdownConfig,
    pub rows: Vec<GrossBreakdownRow>,
    pub within_bound: usize,
    pub failed: usize,
}

/// Compares `‖β̂‖₂` on clean and gross-contaminated versions of the same samples.
pub fn run_gross_breakdown(config: &GrossBreakdownConfig) -> Result<GrossBreakdownReport> {
    check_trials(config.seeds)?;
    config.pipeline.validate()?;
    config.scenario.validate()?;
    let plan = ContaminationPlan::Replace { fraction: config.fraction, magnitude: config.magnitude };
    plan.validate()?;
    let spec = &config.scenario;
    let rows: Vec<GrossBreakdownRow> = (0..config.seeds)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(config.seed, t as u64);
            let norm = |d: &Dataset, seed: u64| {
                fit_pipeline(d, config.estimator, &spec.beta0, &config.pipeline, seed).ok().map(|f| f.beta.norm())
            };
            let Ok(sample) = generate(spec, &mut rng) else {
                return GrossBreakdownRow { trial: t, clean_norm: None, contaminated_norm: None };
            };
            let cv_seed = rng.next_u64();
            let dirty = plan.apply(&sample.train, None, &mut rng).ok();
            GrossBreakdownRow {
                trial: t,
                clean_norm: norm(&sample.train, cv_seed),
                contaminated_norm: dirty.and_then(|(d, _)| norm(&d, cv_seed)),
            }
        })
        .collect();
    let within_bound = rows.iter().filter(|r| r.within(config.bound_factor) == Some(true)).count();
    let failed = rows.iter().filter(|r| r.within(config.bound_factor).is_none()).count();
    Ok(GrossBreakdownReport { config: config.clone(), rows, within_bound, failed })
}

// ------------------------------------------------------- overshrinkage

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvershrinkConfig {
    pub n: usize,
    pub beta0: Vec<f64>,
    pub snr_db: f64,
    pub n_lambda: usize,
    pub lambda_ratio: f64,
    pub trials: usize,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

impl Default for OvershrinkConfig {
    fn default() -> Self {
        Self {
            n: 50,
            beta0: vec![10.0, 5.0, 4.0, 3.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            snr_db: 35.0,
            n_lambda: 20,
            lambda_ratio: 1e-3,
            trials: 100,
            pipeline: PipelineConfig::default(),
            seed: 0,
        }
    }
}

impl OvershrinkConfig {
    pub fn scenario(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: "overshrinkage".into(),
            n: self.n,
            beta0: self.beta0.clone(),
            blocks: vec![CorrelationBlock { size: self.beta0.len(), rho: 0.0 }],
            snr_db: Some(self.snr_db),
            error_law: ErrorLaw::Normal,
        }
    }
}

/// Mean bias of each truly nonzero coefficient along the λ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasPath {
    pub estimator: EstimatorKind,
    /// Indices of the nonzero coefficients reported.
    pub coefficients: Vec<usize>,
    /// `[λ index][coefficient]`
    pub mean_bias: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvershrinkReport {
    pub config: OvershrinkConfig,
    pub lambda_grid: Vec<f64>,
    pub paths: Vec<BiasPath>,
}

impl OvershrinkReport {
    pub fn path(&self, estimator: EstimatorKind) -> Option<&BiasPath> {
        self.paths.iter().find(|p| p.estimator == estimator)
    }
}

/// Bias paths of the tau-Lasso and adaptive tau-Lasso on a common λ grid
/// topped by the tau-Lasso `λ_max` of a reference sample.
pub fn run_overshrinkage(config: &OvershrinkConfig) -> Result<OvershrinkReport> {
    check_trials(config.trials)?;
    config.pipeline.validate()?;
    let spec = config.scenario();
    spec.validate()?;
    let pcfg = &config.pipeline;
    let reference = generate(&spec, &mut stream_rng(config.seed, u64::MAX))?;
    let reference = Prepared::new(&reference.train, pcfg)?;
    let grid = lambda_grid_from_max(lambda_max(&reference.data, &pcfg.tuning)?, config.n_lambda, config.lambda_ratio)?;
    let support: Vec<usize> = (0..spec.p()).filter(|&j| spec.beta0[j] != 0.0).collect();

    // [trial] -> Option<[estimator][λ][coef]>
    let per_trial: Vec<Option<[Vec<Vec<f64>>; 2]>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(config.seed, t as u64);
            let sample = generate(&spec, &mut rng).ok()?;
            let cv_seed = rng.next_u64();
            let prep = Prepared::new(&sample.train, pcfg).ok()?;
            let bias = |fits: Vec<taulasso::Result<FitResult>>| -> Option<Vec<Vec<f64>>> {
                fits.into_iter()
                    .map(|f| {
                        let f = f.ok()?;
                        let (beta, _) = prep.map_back(&f.beta);
                        Some(support.iter().map(|&j| beta[j] - spec.beta0[j]).collect())
                    })
                    .collect()
            };
            let plain = TauLassoEstimator { tuning: pcfg.tuning, options: pcfg.options };
            let plain_bias = bias(plain.fit_path(&prep.data, &grid))?;
            let (weights, _) = pilot_weights(&prep.data, pcfg, cv_seed).ok()?;
            let adaptive = AdaptiveTauLassoEstimator { tuning: pcfg.tuning, options: pcfg.options, weights };
            let adaptive_bias = bias(adaptive.fit_path(&prep.data, &grid))?;
            Some([plain_bias, adaptive_bias])
        })
        .collect();
    let ok: Vec<&[Vec<Vec<f64>>; 2]> = per_trial.iter().flatten().collect();
    let failed = config.trials - ok.len();
    let paths = [EstimatorKind::TauLasso, EstimatorKind::AdaptiveTauLasso]
        .into_iter()
        .enumerate()
        .map(|(e, estimator)| {
            let mut mean_bias = Vec::with_capacity(grid.len());
            let mut se = Vec::with_capacity(grid.len());
            for l in 0..grid.len() {
                let stats: Vec<Stat> = (0..support.len())
                    .map(|c| Stat::of(&ok.iter().map(|r| r[e][l][c]).collect::<Vec<_>>()))
                    .collect();
                mean_bias.push(stats.iter().map(|s| s.mean).collect());
                se.push(stats.iter().map(|s| s.se).collect());
            }
            BiasPath { estimator, coefficients: support.clone(), mean_bias, se, failed }
        })
        .collect();
    Ok(OvershrinkReport { config: config.clone(), lambda_grid: grid, paths })
}

// ------------------------------------------------- influence validation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfConfig {
    pub n: usize,
    pub beta0: f64,
    /// Penalty is `lambda_scale / n`.
    pub lambda_scale: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub tuning: TuningPair,
    pub seed: u64,
}

impl Default for IfConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            beta0: 1.5,
            lambda_scale: 0.1,
            grid_min: -10.0,
            grid_max: 10.0,
            grid_step: 1.0,
            tuning: TuningPair::default(),
            seed: 0,
        }
    }
}

impl IfConfig {
    pub fn grid_values(&self) -> Result<Vec<f64>> {
        if !(self.grid_step > 0.0 && self.grid_min <= self.grid_max) {
            return Err(BenchError::InvalidSpec("grid needs min ≤ max and a positive step".into()));
        }
        let k = ((self.grid_max - self.grid_min) / self.grid_step + 1e-9).floor() as usize;
        Ok((0..=k).map(|i| self.grid_min + i as f64 * self.grid_step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfValidation {
    pub config: IfConfig,
    pub lambda: f64,
    pub pilot_theta: Vec<f64>,
    pub theta: Vec<f64>,
    /// Influence of the tau-Lasso pilot.
    pub tau_lasso: InfluenceReport,
    /// Influence of the adaptive tau-Lasso with the tau-Lasso pilot.
    pub adaptive: InfluenceReport,
}

fn polished_fit(data: &Dataset, lambda: f64, tuning: &TuningPair, weights: Option<&AdaptiveWeights>, init: Option<&DVector<f64>>) -> taulasso::Result<FitResult> {
    let precise = SolverOptions::precise();
    match weights {
        None => {
            let start = match init {
                Some(b) => b.clone(),
                None => fit_tau_lasso(data, lambda, tuning, None, &SolverOptions::default())?.beta,
            };
            fit_tau_lasso(data, lambda, tuning, Some(&start), &precise)
        }
        Some(w) => {
            let start = match init {
                Some(b) => b.clone(),
                None => fit_adaptive_tau_lasso(data, lambda, tuning, w, None, &SolverOptions::default())?.beta,
            };
            fit_adaptive_tau_lasso(data, lambda, tuning, w, Some(&start), &precise)
        }
    }
}

/// Closed-form IF against the standardized sensitivity curve on the one
/// predictor toy model, with the sample itself as the distribution `H`.
pub fn run_if_validation(config: &IfConfig) -> Result<IfValidation> {
    if config.n < 10 {
        return Err(BenchError::InvalidSpec("influence validation needs n ≥ 10".into()));
    }
    let values = config.grid_values()?;
    let tuning = config.tuning;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spec = ScenarioSpec {
        name: "toy".into(),
        n: config.n,
        beta0: vec![config.beta0],
        blocks: vec![CorrelationBlock { size: 1, rho: 0.0 }],
        snr_db: None,
        error_law: ErrorLaw::Normal,
    };
    let data = generate(&spec, &mut rng)?.train;
    let lambda = config.lambda_scale / config.n as f64;

    let pilot = polished_fit(&data, lambda, &tuning, None, None)?;
    let weights = AdaptiveWeights::from_pilot(&pilot.beta, 1.0, 0.0)?;
    let adaptive = polished_fit(&data, lambda, &tuning, Some(&weights), None)?;

    let engine = ExpectationEngine::from_sample(&data);
    let pilot_f = FunctionalValue::from_fit(&pilot)?;
    let adaptive_f = FunctionalValue::from_fit(&adaptive)?;
    let pilot_if = TauLassoInfluence::new(&pilot_f, &engine, &tuning)?;
    let adaptive_if = AdaptiveTauLassoInfluence::new(&adaptive_f, &pilot_f, &engine, &tuning)?;
    let base_pilot = theta(&pilot);
    let base_adaptive = theta(&adaptive);
    let scale = (config.n + 1) as f64;

    let grid: Vec<(f64, Vec<f64>)> = values
        .iter()
        .flat_map(|&y0| values.iter().map(move |&x0| (y0, vec![x0])))
        .collect();
    type Point = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);
    let evaluated: Vec<Result<Point>> = grid
        .par_iter()
        .map(|(y0, x0)| {
            let if_p = pilot_if.evaluate(*y0, x0)?;
            let if_a = adaptive_if.evaluate(*y0, x0, &if_p)?;
            let aug = data.with_row(*y0, x0)?;
            let p2 = polished_fit(&aug, lambda, &tuning, None, Some(&pilot.beta))?;
            let w2 = AdaptiveWeights::from_pilot(&p2.beta, 1.0, 0.0)?;
            let a2 = polished_fit(&aug, lambda, &tuning, Some(&w2), Some(&adaptive.beta))?;
            let sc_p = (theta(&p2) - &base_pilot) * scale;
            let sc_a = (theta(&a2) - &base_adaptive) * scale;
            Ok((if_p.iter().copied().collect(), sc_p.iter().copied().collect(), if_a.iter().copied().collect(), sc_a.iter().copied().collect()))
        })
        .collect();
    let mut cols: [Vec<Vec<f64>>; 4] = Default::default();
    for r in evaluated {
        let (a, b, c, d) = r?;
        cols[0].push(a);
        cols[1].push(b);
        cols[2].push(c);
        cols[3].push(d);
    }
    let [if_p, sc_p, if_a, sc_a] = cols;
    Ok(IfValidation {
        config: config.clone(),
        lambda,
        pilot_theta: base_pilot.iter().copied().collect(),
        theta: base_adaptive.iter().copied().collect(),
        tau_lasso: InfluenceReport::new(grid.clone(), if_p, sc_p)?,
        adaptive: InfluenceReport::new(grid, if_a, sc_a)?,
    })
}
