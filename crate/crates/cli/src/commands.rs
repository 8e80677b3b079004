use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use taulasso::rho::{calibrate_breakdown, DEFAULT_C1};
use taulasso::selection::lambda_grid_from_max;
use taulasso::{
    cross_validate, fit_s_ridge_cv, AdaptiveTauLassoEstimator, AdaptiveWeights, CvResult, Dataset, Estimator,
    FitResult, SolverOptions, TauLassoEstimator, TuningPair,
};
use taulasso_bench::contamination::{ContaminationPlan, RowPlacement};
use taulasso_bench::experiments::parse_grid;
use taulasso_bench::pipeline::Prepared;
use taulasso_bench::report::{
    write_breakdown_csv, write_gross_breakdown_csv, write_influence_csv, write_json, write_overshrink_csv,
    write_table_csv,
};
use taulasso_bench::{
    run_breakdown_curve, run_gross_breakdown, run_if_validation, run_overshrinkage, run_table_experiment,
    BreakdownConfig, EstimatorKind, ErrorLaw, GrossBreakdownConfig, IfConfig, OvershrinkConfig, PipelineConfig,
    ScenarioSpec, TableConfig,
};

use crate::args::{
    BreakdownArgs, EstimatorArg, FitArgs, InfluenceArgs, OvershrinkArgs, PilotArg, ScenarioArgs, SimulateArgs,
    TuningArgs,
};
use crate::error::CliError;
use crate::input::read_dataset;

type CliResult<T> = Result<T, CliError>;

fn resolve_tuning(delta: Option<f64>, c0: Option<f64>, c1: Option<f64>) -> CliResult<TuningPair> {
    let base = TuningPair::default();
    let delta = delta.unwrap_or(base.delta);
    let c0 = match c0 {
        Some(c) => c,
        None if delta == base.delta => base.c0,
        None => calibrate_breakdown(delta)?,
    };
    Ok(TuningPair::new(c0, c1.unwrap_or(DEFAULT_C1), delta)?)
}

fn pipeline_config(args: &TuningArgs, seed: u64) -> CliResult<PipelineConfig> {
    let config = PipelineConfig {
        tuning: resolve_tuning(args.delta, args.c0, args.c1)?,
        options: SolverOptions { starts: args.starts, seed, ..SolverOptions::default() },
        folds: args.folds,
        n_lambda: args.n_lambda,
        lambda_ratio: args.lambda_ratio,
        gamma: args.gamma,
        epsilon_floor: args.epsilon_floor,
        standardize: !args.no_standardize,
    };
    config.validate()?;
    Ok(config)
}

fn create(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_pretty<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Full JSON report to `json`, or the resolved configuration on stderr.
fn echo<R: Serialize, C: Serialize>(json: Option<&Path>, report: &R, config: &C) -> CliResult<()> {
    match json {
        Some(p) => {
            let mut out = create(Some(p))?;
            write_json(&mut out, report)?;
            writeln!(out)?;
            out.flush()?;
        }
        None => eprintln!("config: {}", serde_json::to_string(config)?),
    }
    Ok(())
}

fn check_failures(failed: usize, total: usize, max_fraction: f64) -> CliResult<()> {
    if total > 0 && failed as f64 > max_fraction * total as f64 {
        return Err(CliError::PartialFailure(format!("{failed} of {total} trials failed")));
    }
    Ok(())
}

fn estimator_kinds(names: &[String]) -> CliResult<Vec<EstimatorKind>> {
    if names.is_empty() {
        return Err(CliError::Input("no estimators given".into()));
    }
    names.iter().map(|n| EstimatorKind::parse(n.trim()).map_err(CliError::from)).collect()
}

fn scenario(args: &ScenarioArgs) -> CliResult<ScenarioSpec> {
    let law = ErrorLaw::parse(&args.error_law)?;
    let mut spec = match &args.spec {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_reader::<_, ScenarioSpec>(file)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => ScenarioSpec::named(&args.scenario, law)?,
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    spec.validate()?;
    Ok(spec)
}

// ------------------------------------------------------------------ fit

#[derive(Debug, Serialize)]
struct FitConfigEcho {
    command: &'static str,
    input: PathBuf,
    estimator: EstimatorArg,
    pilot: Option<PilotArg>,
    lambda: Option<f64>,
    cv: bool,
    seed: u64,
    pipeline: PipelineConfig,
}

#[derive(Debug, Serialize)]
struct PilotEcho {
    kind: PilotArg,
    lambda: f64,
    beta: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct CvEcho {
    lambda_grid: Vec<f64>,
    cv_scores: Vec<Option<f64>>,
    best_lambda: f64,
    best_index: usize,
    warnings: Vec<String>,
}

impl From<&CvResult> for CvEcho {
    fn from(cv: &CvResult) -> Self {
        Self {
            lambda_grid: cv.lambda_grid.clone(),
            cv_scores: cv.cv_scores.iter().map(|v| v.is_finite().then_some(*v)).collect(),
            best_lambda: cv.best_lambda,
            best_index: cv.best_index,
            warnings: cv.warnings.clone(),
        }
    }
}

/// Keys serialize in declaration order.
#[derive(Debug, Serialize)]
struct FitOutput {
    beta: Vec<f64>,
    s: f64,
    tau: f64,
    lambda: f64,
    active_set: Vec<usize>,
    objective: f64,
    trace_length: usize,
    seed: u64,
    intercept: f64,
    converged: bool,
    predictors: Vec<String>,
    pilot: Option<PilotEcho>,
    cv: Option<CvEcho>,
    config: FitConfigEcho,
}

fn pilot_beta(data: &Dataset, kind: PilotArg, config: &PipelineConfig, seed: u64) -> CliResult<(f64, Vec<f64>)> {
    match kind {
        PilotArg::SRidge => {
            let (fit, cv) = fit_s_ridge_cv(data, &config.tuning, &config.options, seed)?;
            Ok((cv.best_lambda, fit.beta.iter().copied().collect()))
        }
        PilotArg::TauLasso => {
            let est = TauLassoEstimator { tuning: config.tuning, options: config.options };
            let grid = lambda_grid_from_max(est.lambda_max(data)?, config.n_lambda, config.lambda_ratio)?;
            let cv = cross_validate(data, &est, &grid, config.folds, seed, &config.tuning)?;
            let fit = est.fit(data, cv.best_lambda, None)?;
            Ok((cv.best_lambda, fit.beta.iter().copied().collect()))
        }
    }
}

fn select_and_fit(
    data: &Dataset,
    est: &dyn Estimator,
    lambda_max: f64,
    lambda: Option<f64>,
    config: &PipelineConfig,
    seed: u64,
) -> CliResult<(FitResult, Option<CvResult>)> {
    match lambda {
        Some(l) => Ok((est.fit(data, l, None)?, None)),
        None => {
            let grid = lambda_grid_from_max(lambda_max, config.n_lambda, config.lambda_ratio)?;
            let cv = cross_validate(data, est, &grid, config.folds, seed, &config.tuning)?;
            let fit = est.fit(data, cv.best_lambda, None)?;
            Ok((fit, Some(cv)))
        }
    }
}

pub fn fit(args: &FitArgs, command: &'static str, force_cv: bool) -> CliResult<()> {
    let use_cv = args.cv || force_cv;
    if force_cv && args.lambda.is_some() {
        return Err(CliError::Input("cv selects λ itself; drop --lambda".into()));
    }
    if !use_cv && args.lambda.is_none() {
        return Err(CliError::Input("give --lambda or --cv".into()));
    }
    if let Some(l) = args.lambda {
        if !(l.is_finite() && l >= 0.0) {
            return Err(CliError::Input(format!("lambda must be nonnegative, got {l}")));
        }
    }
    let config = pipeline_config(&args.tuning, args.seed)?;
    let (raw, names) = read_dataset(&args.input)?;
    let prep = Prepared::new(&raw, &config)?;
    let data = &prep.data;
    let lambda = if use_cv { None } else { args.lambda };

    let (fit, cv, pilot) = match args.estimator {
        EstimatorArg::TauLasso => {
            let est = TauLassoEstimator { tuning: config.tuning, options: config.options };
            let lmax = est.lambda_max(data)?;
            let (fit, cv) = select_and_fit(data, &est, lmax, lambda, &config, args.seed)?;
            (fit, cv, None)
        }
        EstimatorArg::Adaptive => {
            let (pilot_lambda, pilot) = pilot_beta(data, args.pilot, &config, args.seed)?;
            let weights = AdaptiveWeights::from_pilot(
                &nalgebra::DVector::from_vec(pilot.clone()),
                config.gamma,
                config.epsilon_floor,
            )?;
            let est = AdaptiveTauLassoEstimator { tuning: config.tuning, options: config.options, weights };
            let lmax = est.lambda_max(data)?;
            let (fit, cv) = select_and_fit(data, &est, lmax, lambda, &config, args.seed.wrapping_add(1))?;
            (fit, cv, Some(PilotEcho { kind: args.pilot, lambda: pilot_lambda, beta: pilot }))
        }
    };
    let (beta, intercept) = prep.map_back(&fit.beta);
    let output = FitOutput {
        beta: beta.iter().copied().collect(),
        s: fit.s,
        tau: fit.tau,
        lambda: fit.lambda,
        active_set: fit.active_set.clone(),
        objective: fit.objective,
        trace_length: fit.trace.len(),
        seed: args.seed,
        intercept,
        converged: fit.converged,
        predictors: names,
        pilot,
        cv: cv.as_ref().map(CvEcho::from),
        config: FitConfigEcho {
            command,
            input: args.input.clone(),
            estimator: args.estimator,
            pilot: (args.estimator == EstimatorArg::Adaptive).then_some(args.pilot),
            lambda: args.lambda,
            cv: use_cv,
            seed: args.seed,
            pipeline: config,
        },
    };
    write_pretty(args.output.as_deref(), &output)
}

// ------------------------------------------------------------- simulate

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec = scenario(&args.scenario)?;
    let row_placement = RowPlacement::parse(&args.placement)?;
    let contamination = args.contaminate.then(|| {
        let mut plan = ContaminationPlan::default();
        if let ContaminationPlan::Gross { placement, .. } = &mut plan {
            *placement = row_placement;
        }
        plan
    });
    let config = TableConfig {
        scenarios: vec![spec],
        estimators: estimator_kinds(&args.estimators)?,
        trials: args.trials,
        contamination,
        pipeline: pipeline_config(&args.tuning, 0)?,
        seed: args.seed,
    };
    let report = run_table_experiment(&config)?;
    write_table_csv(create(args.output.as_deref())?, &report)?;
    echo(args.json.as_deref(), &report, &config)?;
    let failed = report.records.iter().filter(|r| r.metrics.is_none()).count();
    check_failures(failed, report.records.len(), args.max_failed)
}

// ------------------------------------------------------------ breakdown

pub fn breakdown(args: &BreakdownArgs) -> CliResult<()> {
    let spec = scenario(&args.scenario)?;
    let estimators = estimator_kinds(&args.estimators)?;
    let pipeline = pipeline_config(&args.tuning, 0)?;
    match args.gross_magnitude {
        Some(magnitude) => {
            let mut reports = Vec::with_capacity(estimators.len());
            for estimator in estimators {
                let config = GrossBreakdownConfig {
                    scenario: spec.clone(),
                    fraction: args.fraction,
                    magnitude,
                    seeds: args.trials,
                    estimator,
                    bound_factor: args.bound_factor,
                    pipeline,
                    seed: args.seed,
                };
                reports.push(run_gross_breakdown(&config)?);
            }
            write_gross_breakdown_csv(create(args.output.as_deref())?, &reports)?;
            let configs: Vec<_> = reports.iter().map(|r| &r.config).collect();
            echo(args.json.as_deref(), &reports, &configs)?;
            let failed: usize = reports.iter().map(|r| r.failed).sum();
            check_failures(failed, reports.iter().map(|r| r.rows.len()).sum(), args.max_failed)
        }
        None => {
            let config = BreakdownConfig {
                scenario: spec,
                ystar_grid: parse_grid(&args.ystar)?,
                fraction: args.fraction,
                estimators,
                trials: args.trials,
                pipeline,
                seed: args.seed,
            };
            let report = run_breakdown_curve(&config)?;
            write_breakdown_csv(create(args.output.as_deref())?, &report)?;
            echo(args.json.as_deref(), &report, &config)?;
            let failed: usize = report.points.iter().map(|p| p.failed).sum();
            let total = report.points.len() * config.trials;
            check_failures(failed, total, args.max_failed)
        }
    }
}

// ----------------------------------------------------------- overshrink

pub fn overshrink(args: &OvershrinkArgs) -> CliResult<()> {
    let config = OvershrinkConfig {
        n: args.n,
        beta0: args.beta0.clone(),
        snr_db: args.snr_db,
        n_lambda: args.tuning.n_lambda,
        lambda_ratio: args.tuning.lambda_ratio,
        trials: args.trials,
        pipeline: pipeline_config(&args.tuning, 0)?,
        seed: args.seed,
    };
    let report = run_overshrinkage(&config)?;
    write_overshrink_csv(create(args.output.as_deref())?, &report)?;
    echo(args.json.as_deref(), &report, &config)?;
    let failed = report.paths.first().map_or(0, |p| p.failed);
    check_failures(failed, config.trials, args.max_failed)
}

// ------------------------------------------------------------ influence

fn parse_step_grid(spec: &str) -> CliResult<(f64, f64, f64)> {
    let bad = || CliError::Input(format!("grid '{spec}' is not of the form min:max:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match parts[..] {
        [lo, hi, step] if lo <= hi && step > 0.0 => Ok((lo, hi, step)),
        _ => Err(bad()),
    }
}

pub fn influence(args: &InfluenceArgs) -> CliResult<()> {
    if !args.toy_1d {
        return Err(CliError::Input("only the one-predictor toy model is available; pass --toy-1d".into()));
    }
    let (grid_min, grid_max, grid_step) = parse_step_grid(&args.grid)?;
    let config = IfConfig {
        n: args.n,
        beta0: args.beta0,
        lambda_scale: args.lambda_scale,
        grid_min,
        grid_max,
        grid_step,
        tuning: resolve_tuning(args.delta, args.c0, args.c1)?,
        seed: args.seed,
    };
    let report = run_if_validation(&config)?;
    write_influence_csv(create(args.output.as_deref())?, &report, args.estimator == EstimatorArg::TauLasso)?;
    echo(args.json.as_deref(), &report, &config)
}
