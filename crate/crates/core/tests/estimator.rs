use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use taulasso::{
    cross_validate, fit_adaptive_tau_lasso, fit_tau_lasso, lambda_max, m_scale, make_lambda_grid, tau_scale,
    AdaptiveWeights, Dataset, SolverOptions, TauLassoEstimator, TuningPair,
};

fn linear_data(n: usize, beta: &[f64], noise: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = beta.len();
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let e = DVector::from_fn(n, |_, _| noise * rng.sample::<f64, _>(StandardNormal));
    let y = &x * DVector::from_column_slice(beta) + e;
    Dataset::new(y, x).unwrap()
}

#[test]
fn m_scale_of_constant_magnitudes_inverts_rho() {
    let tuning = TuningPair::default();
    let rho0 = tuning.rho0();
    let r: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 2.5 } else { -2.5 }).collect();
    let s = m_scale(&r, &rho0, tuning.delta).unwrap().s;
    // ρ0(2.5/s) = δ
    let t = rho0.inverse_rho(tuning.delta).unwrap();
    assert!((s - 2.5 / t).abs() < 1e-9, "{s} vs {}", 2.5 / t);
}

#[test]
fn m_scale_ignores_a_minority_of_gross_residuals() {
    let tuning = TuningPair::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut r: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
    let clean = m_scale(&r, &tuning.rho0(), tuning.delta).unwrap().s;
    for v in r.iter_mut().take(40) {
        *v = 1e8;
    }
    let dirty = m_scale(&r, &tuning.rho0(), tuning.delta).unwrap().s;
    assert!(dirty < 3.0 * clean, "{clean} -> {dirty}");
}

#[test]
fn unpenalized_fit_recovers_coefficients() {
    let beta = [2.0, -1.0, 0.0, 0.5];
    let data = linear_data(200, &beta, 0.1, 1);
    let fit = fit_tau_lasso(&data, 0.0, &TuningPair::default(), None, &SolverOptions::default()).unwrap();
    for (b, t) in fit.beta.iter().zip(beta) {
        assert!((b - t).abs() < 0.05, "{:?}", fit.beta);
    }
}

#[test]
fn fit_resists_response_outliers() {
    let beta = [3.0, 0.0, -2.0];
    let mut data = linear_data(100, &beta, 0.5, 2);
    let mut y = data.y().clone();
    for i in 0..15 {
        y[i * 6] += 80.0;
    }
    data = data.with_response(y).unwrap();
    let fit = fit_tau_lasso(&data, 0.01, &TuningPair::default(), None, &SolverOptions::default()).unwrap();
    assert!((fit.beta[0] - 3.0).abs() < 0.3 && (fit.beta[2] + 2.0).abs() < 0.3, "{:?}", fit.beta);
}

#[test]
fn penalty_above_lambda_max_gives_zero() {
    let tuning = TuningPair::default();
    let data = linear_data(80, &[1.0, 0.5, 0.0], 1.0, 3);
    let lmax = lambda_max(&data, &tuning).unwrap();
    let fit = fit_tau_lasso(&data, lmax * 1.01, &tuning, None, &SolverOptions::default()).unwrap();
    assert!(fit.beta.iter().all(|b| *b == 0.0), "{:?}", fit.beta);
    assert!(fit.active_set.is_empty());
    let below = fit_tau_lasso(&data, lmax * 0.5, &tuning, None, &SolverOptions::default()).unwrap();
    assert!(!below.active_set.is_empty());
}

#[test]
fn unit_adaptive_weights_match_plain_fit() {
    let tuning = TuningPair::default();
    let data = linear_data(60, &[1.5, 0.0, -0.7], 0.5, 4);
    let options = SolverOptions::default();
    let weights = AdaptiveWeights::from_pilot(&DVector::from_element(3, 1.0), 1.0, 0.0).unwrap();
    let plain = fit_tau_lasso(&data, 0.05, &tuning, None, &options).unwrap();
    let adaptive = fit_adaptive_tau_lasso(&data, 0.05, &tuning, &weights, None, &options).unwrap();
    assert!((plain.objective - adaptive.objective).abs() < 1e-8);
    assert!((plain.beta - adaptive.beta).amax() < 1e-6);
}

#[test]
fn zero_pilot_coefficient_is_excluded() {
    let tuning = TuningPair::default();
    let data = linear_data(60, &[1.5, 0.8, -0.7], 0.5, 5);
    let weights = AdaptiveWeights::from_pilot(&DVector::from_vec(vec![1.0, 0.0, 1.0]), 1.0, 0.0).unwrap();
    let fit = fit_adaptive_tau_lasso(&data, 0.01, &tuning, &weights, None, &SolverOptions::default()).unwrap();
    assert_eq!(fit.beta[1], 0.0);
    assert!(!fit.active_set.contains(&1));
}

#[test]
fn cross_validation_picks_a_grid_point() {
    let tuning = TuningPair::default();
    let data = linear_data(60, &[2.0, 0.0, 0.0, 1.0], 1.0, 6);
    let grid = make_lambda_grid(&data, &tuning, 8, 1e-2).unwrap();
    assert!(grid.windows(2).all(|w| w[0] > w[1]));
    let est = TauLassoEstimator { tuning, options: SolverOptions::default() };
    let cv = cross_validate(&data, &est, &grid, 5, 9, &tuning).unwrap();
    assert_eq!(cv.lambda_grid[cv.best_index], cv.best_lambda);
    let best = cv.cv_scores[cv.best_index];
    assert!(cv.cv_scores.iter().all(|s| *s >= best));
    assert_eq!(cv.fold_assignments.len(), 60);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scales_are_equivariant_and_order_free(
        r in prop::collection::vec(-50.0f64..50.0, 5..60),
        k in 0.01f64..100.0,
    ) {
        let tuning = TuningPair::default();
        prop_assume!(r.iter().filter(|v| v.abs() > 1e-6).count() * 2 > r.len());
        let a = tau_scale(&r, &tuning).unwrap();
        let scaled: Vec<f64> = r.iter().map(|v| -k * v).collect();
        let b = tau_scale(&scaled, &tuning).unwrap();
        prop_assert!((b.s - k * a.s).abs() <= 1e-7 * k * a.s);
        prop_assert!((b.tau - k * a.tau).abs() <= 1e-7 * k * a.tau);
        let mut rev = r.clone();
        rev.reverse();
        let c = tau_scale(&rev, &tuning).unwrap();
        prop_assert!((c.s - a.s).abs() <= 1e-9 * a.s);
    }

    #[test]
    fn solver_trace_never_increases(seed in 0u64..1000, lambda in 0.0f64..0.5) {
        let data = linear_data(30, &[1.0, -1.0, 0.0], 1.0, seed);
        let options = SolverOptions { starts: 1, ..SolverOptions::default() };
        let fit = fit_tau_lasso(&data, lambda, &TuningPair::default(), None, &options).unwrap();
        prop_assert!(fit.trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12) || fit.trace.len() < 2);
        prop_assert!((fit.objective - fit.trace.last().copied().unwrap_or(fit.objective)).abs() < 1e-9 * fit.objective.max(1.0));
    }
}
