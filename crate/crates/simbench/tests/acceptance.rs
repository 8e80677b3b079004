//! Acceptance suite. Prints one PASS/FAIL line per criterion. Numeric
//! arguments select criteria, e.g. `cargo test --test acceptance -- 1 4`.
//! `--strict` (or `TAULASSO_ACCEPTANCE_STRICT`) exits nonzero when any
//! criterion fails; `--all-scenarios` adds ungated scenario 2 to 5 tables.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use taulasso::influence::normal_efficiency;
use taulasso::quadrature::NormalQuadrature;
use taulasso::rho::{calibrate_breakdown, DEFAULT_C0, DEFAULT_DELTA};
use taulasso::selection::make_lambda_grid;
use taulasso::solver::tau_gradient;
use taulasso::{
    cross_validate, fit_tau_lasso, m_scale, objective, standardize, tau_scale, Bisquare, Dataset, SolverOptions,
    TauLassoEstimator, TuningPair,
};
use taulasso_bench::reference::reference_value;
use taulasso_bench::{
    run_breakdown_curve, run_gross_breakdown, run_if_validation, run_overshrinkage, run_table_experiment,
    BreakdownConfig, ContaminationPlan, EstimatorKind, ErrorLaw, GrossBreakdownConfig, IfConfig, OvershrinkConfig,
    PipelineConfig, RowPlacement, ScenarioSpec, TableConfig,
};

use EstimatorKind::{AdaptiveTauLasso as Adaptive, TauLasso as Plain};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_rel(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn scenario1() -> ScenarioSpec {
    ScenarioSpec::named("scenario1", ErrorLaw::Normal).unwrap()
}

fn normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn gaussian_data(n: usize, beta: &[f64], noise: f64, rng: &mut ChaCha8Rng) -> Dataset {
    let p = beta.len();
    let x = DMatrix::from_vec(n, p, normals(n * p, rng));
    let e = DVector::from_vec(normals(n, rng)) * noise;
    let y = &x * DVector::from_column_slice(beta) + e;
    Dataset::new(y, x).unwrap()
}

fn calibration() -> Outcome {
    let c = calibrate_breakdown(0.25).unwrap();
    let q = NormalQuadrature::standard();
    let rho = Bisquare::new(DEFAULT_C0).unwrap();
    let mean = q.expect(|z| rho.rho(z));
    let pass = (c - 2.9370).abs() <= 1e-3 && (mean - 0.25).abs() <= 1e-4;
    outcome(pass, format!("c(0.25) = {c:.5}, E rho(Z; 2.9370) = {mean:.6}"))
}

fn efficiency() -> Outcome {
    let e = normal_efficiency(&TuningPair::default()).unwrap();
    let target = 1.0 / 0.95;
    let pass = (e.variance_ratio - target).abs() <= 0.01;
    outcome(pass, format!("variance ratio {:.5} (target {target:.5}), W = {:.5}", e.variance_ratio, e.wbar))
}

fn scale_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = normals(1_000_000, &mut rng);
    let s = m_scale(&r, &Bisquare::new(DEFAULT_C0).unwrap(), DEFAULT_DELTA).unwrap().s;
    outcome((0.99..=1.01).contains(&s), format!("s = {s:.5}"))
}

/// Minimum of the objective over the lattice `[−3, 3]²` with step 0.01.
fn lattice_minimum(data: &Dataset, lambda: f64, tuning: &TuningPair) -> f64 {
    let mut best = f64::INFINITY;
    for a in -300..=300 {
        for b in -300..=300 {
            let beta = DVector::from_vec(vec![a as f64 * 0.01, b as f64 * 0.01]);
            best = best.min(objective(data, &beta, lambda, tuning, None).unwrap());
        }
    }
    best
}

fn global_optimality() -> Outcome {
    let tuning = TuningPair::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20 {
        let beta = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let mut data = gaussian_data(40, &beta, 0.5, &mut rng);
        if k % 2 == 1 {
            // gross response outliers make the objective nonconvex
            let mut y = data.y().clone();
            for i in 0..6 {
                y[i] += 20.0 + 5.0 * i as f64;
            }
            data = data.with_response(y).unwrap();
        }
        let lambda = 0.05 * (k % 4) as f64;
        let fit = fit_tau_lasso(&data, lambda, &tuning, None, &SolverOptions::default()).unwrap();
        worst = worst.max(fit.objective - lattice_minimum(&data, lambda, &tuning));
    }
    outcome(worst <= 1e-3, format!("max(solver − lattice) = {worst:.3e} over 20 problems"))
}

fn table(contamination: Option<ContaminationPlan>) -> TableConfig {
    TableConfig {
        scenarios: vec![scenario1()],
        estimators: vec![Adaptive, Plain],
        trials: 100,
        contamination,
        pipeline: PipelineConfig::default(),
        seed: 2024,
    }
}

fn clean_table() -> Outcome {
    let report = run_table_experiment(&table(None)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for est in [Adaptive, Plain] {
        let cell = report.cell("scenario1", est).unwrap();
        let target = reference_value("scenario1", ErrorLaw::Normal, false, est, "rmse").unwrap();
        pass &= within_rel(cell.rmse.mean, target, 0.10);
        parts.push(format!("{} RMSE {:.4}±{:.4} (ref {target})", est.name(), cell.rmse.mean, cell.rmse.se));
    }
    let cell = report.cell("scenario1", Adaptive).unwrap();
    let target = reference_value("scenario1", ErrorLaw::Normal, false, Adaptive, "cer").unwrap();
    pass &= (cell.cer.mean - target).abs() <= 0.06;
    parts.push(format!("adaptive CER {:.4}±{:.4} (ref {target})", cell.cer.mean, cell.cer.se));
    let plain = report.cell("scenario1", Plain).unwrap();
    parts.push(format!("tau-lasso CER {:.4}", plain.cer.mean));
    parts.push(format!("failed {:.2}", report.failed_fraction()));
    outcome(pass, parts.join("; "))
}

fn contaminated_table() -> Outcome {
    let report = run_table_experiment(&table(Some(ContaminationPlan::default()))).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for est in [Adaptive, Plain] {
        let cell = report.cell("scenario1", est).unwrap();
        let target = reference_value("scenario1", ErrorLaw::Normal, true, est, "rmse").unwrap();
        pass &= within_rel(cell.rmse.mean, target, 0.15);
        parts.push(format!(
            "{} RMSE {:.4}±{:.4} (ref {target}), CER {:.4}",
            est.name(),
            cell.rmse.mean,
            cell.rmse.se,
            cell.cer.mean
        ));
    }
    // informational: response outliers placed on the leverage rows
    let mut shared = ContaminationPlan::default();
    if let ContaminationPlan::Gross { placement, .. } = &mut shared {
        *placement = RowPlacement::Shared;
    }
    let report = run_table_experiment(&table(Some(shared))).unwrap();
    for est in [Adaptive, Plain] {
        let cell = report.cell("scenario1", est).unwrap();
        parts.push(format!("[shared rows, not gated] {} RMSE {:.4}", est.name(), cell.rmse.mean));
    }
    outcome(pass, parts.join("; "))
}

fn gross_config(fraction: f64, seeds: usize) -> GrossBreakdownConfig {
    GrossBreakdownConfig {
        scenario: scenario1(),
        fraction,
        magnitude: 1e6,
        seeds,
        estimator: Adaptive,
        bound_factor: 10.0,
        pipeline: PipelineConfig::default(),
        seed: 7,
    }
}

fn gross_breakdown() -> Outcome {
    let r = run_gross_breakdown(&gross_config(0.10, 50)).unwrap();
    let pass = r.within_bound == 50;
    let ratio = r
        .rows
        .iter()
        .filter_map(|row| Some(row.contaminated_norm? / row.clean_norm?))
        .fold(0.0, f64::max);
    // the bound may fail above the breakdown point; reported only
    let high = run_gross_breakdown(&gross_config(0.60, 10)).unwrap();
    outcome(
        pass,
        format!(
            "10%: {}/50 within 10x (failed {}), max norm ratio {ratio:.3}; 60% (informational): {}/10 within 10x",
            r.within_bound, r.failed, high.within_bound
        ),
    )
}

fn redescending_curve() -> Outcome {
    let config = BreakdownConfig {
        scenario: scenario1(),
        ystar_grid: vec![5.0, 100.0],
        fraction: 0.1,
        estimators: vec![Plain, Adaptive],
        trials: 100,
        pipeline: PipelineConfig::default(),
        seed: 11,
    };
    let report = run_breakdown_curve(&config).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for est in [Plain, Adaptive] {
        let lo = report.rmse_at(5.0, est).unwrap();
        let hi = report.rmse_at(100.0, est).unwrap();
        pass &= hi.mean <= lo.mean;
        parts.push(format!("{} RMSE(5) {:.4}±{:.4}, RMSE(100) {:.4}±{:.4}", est.name(), lo.mean, lo.se, hi.mean, hi.se));
    }
    outcome(pass, parts.join("; "))
}

fn overshrinkage() -> Outcome {
    let report = run_overshrinkage(&OvershrinkConfig::default()).unwrap();
    let plain = report.path(Plain).unwrap();
    let adaptive = report.path(Adaptive).unwrap();
    // the grid is decreasing, so the upper half comes first
    let upper = report.lambda_grid.len() / 2;
    let holds = (0..upper).filter(|&l| plain.mean_bias[l][0].abs() > adaptive.mean_bias[l][0].abs()).count();
    let mid = upper.saturating_sub(1);
    outcome(
        holds == upper,
        format!(
            "{holds}/{upper} upper-grid points with |bias tau| > |bias adaptive|; at lambda {:.4}: {:.4} vs {:.4}",
            report.lambda_grid[mid], plain.mean_bias[mid][0], adaptive.mean_bias[mid][0]
        ),
    )
}

fn influence() -> Outcome {
    let v = run_if_validation(&IfConfig::default()).unwrap();
    let dev = v.adaptive.worst_normalized_deviation();
    let sup = v.adaptive.sup_norm();
    let pass = dev < 0.1 && sup.is_finite();
    outcome(
        pass,
        format!(
            "adaptive: normalized RMS {:?}, sup {sup:.3}; tau-lasso: normalized RMS {:?}, sup {:.3}",
            v.adaptive.normalized_rms_deviation.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>(),
            v.tau_lasso.normalized_rms_deviation.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>(),
            v.tau_lasso.sup_norm()
        ),
    )
}

fn oracle_property() -> Outcome {
    let spec = ScenarioSpec { n: 1000, ..scenario1() };
    let config = TableConfig {
        scenarios: vec![spec],
        estimators: vec![Adaptive],
        trials: 50,
        contamination: None,
        pipeline: PipelineConfig::default(),
        seed: 31,
    };
    let report = run_table_experiment(&config).unwrap();
    let cell = report.cell("scenario1", Adaptive).unwrap();
    let pass = cell.fpr.mean <= 0.05 && cell.fnr.mean == 0.0 && cell.failed == 0;
    outcome(
        pass,
        format!("FPR {:.4}±{:.4}, FNR {:.4}, failed {}", cell.fpr.mean, cell.fpr.se, cell.fnr.mean, cell.failed),
    )
}

fn property_suites() -> Outcome {
    let tuning = TuningPair::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut failures = Vec::new();

    // ψ = ρ' and ψ' by central differences
    let mut worst = 0.0_f64;
    for c in [tuning.c0, tuning.c1] {
        let b = Bisquare::new(c).unwrap();
        for _ in 0..500 {
            let t: f64 = rng.random_range(-1.2 * c..1.2 * c);
            let h = 1e-6;
            worst = worst.max((b.psi(t) - (b.rho(t + h) - b.rho(t - h)) / (2.0 * h)).abs());
            worst = worst.max((b.psi_prime(t) - (b.psi(t + h) - b.psi(t - h)) / (2.0 * h)).abs());
        }
    }
    if worst > 1e-6 {
        failures.push(format!("derivatives off by {worst:.2e}"));
    }

    // scale equivariance and τ ≤ s
    for _ in 0..200 {
        let r = normals(30, &mut rng);
        let a: f64 = rng.random_range(-50.0..50.0);
        let ar: Vec<f64> = r.iter().map(|v| a * v).collect();
        let (e1, e2) = (tau_scale(&r, &tuning).unwrap(), tau_scale(&ar, &tuning).unwrap());
        if (e2.s - a.abs() * e1.s).abs() > 1e-8 * e2.s || (e2.tau - a.abs() * e1.tau).abs() > 1e-8 * e2.tau {
            failures.push("scale equivariance".into());
            break;
        }
        if e1.tau > e1.s * (1.0 + 1e-12) {
            failures.push("tau exceeds s".into());
            break;
        }
    }

    // the weighted M-lasso gradient equals the gradient of τ²
    for _ in 0..20 {
        let data = gaussian_data(50, &[1.0, -2.0, 0.5], 1.0, &mut rng);
        let beta = DVector::from_vec(normals(3, &mut rng));
        let s = tau_scale(data.residuals(&beta).as_slice(), &tuning).unwrap().s;
        let g = tau_gradient(&data, &beta, s, &tuning).unwrap();
        let tau2 = |b: &DVector<f64>| tau_scale(data.residuals(b).as_slice(), &tuning).unwrap().tau.powi(2);
        for j in 0..3 {
            let mut e = DVector::zeros(3);
            e[j] = 1e-6;
            let fd = (tau2(&(&beta + &e)) - tau2(&(&beta - &e))) / 2e-6;
            if (fd - g[j]).abs() > 1e-5 * (1.0 + fd.abs()) {
                failures.push(format!("gradient {j}: {fd} vs {}", g[j]));
            }
        }
    }

    // CV determinism
    let data = gaussian_data(60, &[2.0, 0.0, -1.0, 0.0], 0.5, &mut rng);
    let est = TauLassoEstimator { tuning, options: SolverOptions::default() };
    let grid = make_lambda_grid(&data, &tuning, 8, 1e-2).unwrap();
    let a = cross_validate(&data, &est, &grid, 5, 9, &tuning).unwrap();
    let b = cross_validate(&data, &est, &grid, 5, 9, &tuning).unwrap();
    if a != b {
        failures.push("cross-validation is not deterministic".into());
    }

    // standardization round trip
    let x = DMatrix::from_fn(40, 3, |i, j| 5.0 * (j as f64 + 1.0) + (i as f64 * 0.37 + j as f64).sin() * 3.0);
    let y = DVector::from_fn(40, |i, _| 10.0 + x[(i, 0)] - 2.0 * x[(i, 2)] + (i as f64).cos());
    let raw = Dataset::new(y, x).unwrap();
    let (std, map) = standardize(&raw).unwrap();
    let beta_std = DVector::from_vec(normals(3, &mut rng));
    let beta = map.destandardize_coefficients(&beta_std);
    let b0 = map.intercept(&beta);
    let pred_raw = raw.x() * &beta;
    let pred_std = std.x() * &beta_std;
    let center = raw.y() - std.y();
    let gap = (0..raw.n()).map(|i| (pred_raw[i] + b0 - (pred_std[i] + center[i])).abs()).fold(0.0, f64::max);
    if gap > 1e-10 {
        failures.push(format!("round trip gap {gap:.2e}"));
    }

    let detail = if failures.is_empty() {
        "derivatives, scale equivariance, tau ≤ s, gradient reduction, CV determinism, round trip".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

type Criterion = (usize, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "calibration", calibration),
    (2, "efficiency constant", efficiency),
    (3, "scale consistency", scale_consistency),
    (4, "small-instance global optimality", global_optimality),
    (5, "clean scenario 1 reproduction", clean_table),
    (6, "contaminated scenario 1 reproduction", contaminated_table),
    (7, "empirical breakdown", gross_breakdown),
    (8, "redescending curve", redescending_curve),
    (9, "overshrinkage", overshrinkage),
    (10, "influence function vs sensitivity curve", influence),
    (11, "oracle property", oracle_property),
    (12, "property suites", property_suites),
];

/// Scenarios 2 to 5 against their reference RMSE, normal errors, clean and
/// contaminated. Reported with a three-standard-error band, never gated.
fn other_scenarios() {
    for name in ["scenario2", "scenario3", "scenario4", "scenario5"] {
        for contamination in [None, Some(ContaminationPlan::default())] {
            let start = Instant::now();
            let contaminated = contamination.is_some();
            let config = TableConfig {
                scenarios: vec![ScenarioSpec::named(name, ErrorLaw::Normal).unwrap()],
                ..table(contamination)
            };
            let report = run_table_experiment(&config).unwrap();
            for est in [Adaptive, Plain] {
                let cell = report.cell(name, est).unwrap();
                let target = reference_value(name, ErrorLaw::Normal, contaminated, est, "rmse").unwrap();
                let inside = (cell.rmse.mean - target).abs() <= 3.0 * cell.rmse.se;
                println!(
                    "INFO {name} {} {}: RMSE {:.4}±{:.4} (ref {target}, {} 3 SE) ({:.1}s)",
                    if contaminated { "contaminated" } else { "clean" },
                    est.name(),
                    cell.rmse.mean,
                    cell.rmse.se,
                    if inside { "within" } else { "outside" },
                    start.elapsed().as_secs_f64()
                );
            }
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let selected: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let strict = args.iter().any(|a| a == "--strict") || std::env::var_os("TAULASSO_ACCEPTANCE_STRICT").is_some();
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{id:>2}] {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    if args.iter().any(|a| a == "--all-scenarios") {
        other_scenarios();
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        if strict {
            std::process::exit(1);
        }
    }
}
