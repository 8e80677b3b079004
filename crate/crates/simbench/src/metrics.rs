//! Prediction and support-recovery metrics.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use taulasso::stats::median;
use taulasso::Dataset;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub rmse: f64,
    /// Median absolute prediction residual.
    pub mad: f64,
    pub fnr: f64,
    pub fpr: f64,
    pub cer: f64,
}

/// Names of the fields of [`MetricsRecord`], in order.
pub const METRIC_NAMES: [&str; 5] = ["rmse", "mad", "fnr", "fpr", "cer"];

impl MetricsRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "rmse" => Some(self.rmse),
            "mad" => Some(self.mad),
            "fnr" => Some(self.fnr),
            "fpr" => Some(self.fpr),
            "cer" => Some(self.cer),
            _ => None,
        }
    }
}

/// `(FNR, FPR, CER)` of the estimated support against `beta0`.
pub fn support_rates(beta: &DVector<f64>, beta0: &[f64]) -> Result<(f64, f64, f64)> {
    if beta.len() != beta0.len() {
        return Err(BenchError::InvalidSpec(format!("estimate has {} coefficients, truth has {}", beta.len(), beta0.len())));
    }
    let p = beta0.len();
    let k0 = beta0.iter().filter(|b| **b != 0.0).count();
    if k0 == 0 {
        return Err(BenchError::UndefinedMetric("FNR needs at least one true nonzero".into()));
    }
    if k0 == p {
        return Err(BenchError::UndefinedMetric("FPR needs at least one true zero".into()));
    }
    let (mut fneg, mut fpos) = (0usize, 0usize);
    for (b, t) in beta.iter().zip(beta0) {
        match (*b != 0.0, *t != 0.0) {
            (false, true) => fneg += 1,
            (true, false) => fpos += 1,
            _ => {}
        }
    }
    Ok((fneg as f64 / k0 as f64, fpos as f64 / (p - k0) as f64, (fneg + fpos) as f64 / p as f64))
}

/// Scores original-scale coefficients and intercept on a test sample.
pub fn score(beta: &DVector<f64>, intercept: f64, beta0: &[f64], test: &Dataset) -> Result<MetricsRecord> {
    if test.p() != beta.len() {
        return Err(BenchError::InvalidSpec("test sample and estimate differ in dimension".into()));
    }
    let resid = test.residuals(beta).add_scalar(-intercept);
    let rmse = (resid.norm_squared() / test.n() as f64).sqrt();
    let abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
    let (fnr, fpr, cer) = support_rates(beta, beta0)?;
    Ok(MetricsRecord { rmse, mad: median(&abs), fnr, fpr, cer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    const B0: [f64; 10] = [4.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0];

    #[test]
    fn perfect_fit_scores_zero() {
        let x = DMatrix::from_fn(20, 10, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let test = Dataset::new(&x * DVector::from_column_slice(&B0), x).unwrap();
        let m = score(&DVector::from_column_slice(&B0), 0.0, &B0, &test).unwrap();
        assert_eq!((m.rmse, m.mad, m.fnr, m.fpr, m.cer), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_estimate_misses_everything() {
        let (fnr, fpr, cer) = support_rates(&DVector::zeros(10), &B0).unwrap();
        assert_eq!((fnr, fpr, cer), (1.0, 0.0, 0.3));
    }

    #[test]
    fn intercept_enters_predictions() {
        let x = DMatrix::from_element(4, 2, 1.0);
        let test = Dataset::new(DVector::from_element(4, 5.0), x).unwrap();
        let m = score(&DVector::from_vec(vec![1.0, 0.0]), 4.0, &[1.0, 0.0], &test).unwrap();
        assert_eq!(m.rmse, 0.0);
        let m = score(&DVector::from_vec(vec![1.0, 0.0]), 1.0, &[1.0, 0.0], &test).unwrap();
        assert_eq!((m.rmse, m.mad), (3.0, 3.0));
    }

    #[test]
    fn undefined_rates_are_errors() {
        assert!(matches!(support_rates(&DVector::zeros(2), &[0.0, 0.0]), Err(BenchError::UndefinedMetric(_))));
        assert!(matches!(support_rates(&DVector::zeros(2), &[1.0, 1.0]), Err(BenchError::UndefinedMetric(_))));
    }

    proptest! {
        #[test]
        fn cer_counts_misclassifications(est in proptest::collection::vec(any::<bool>(), 10)) {
            let beta = DVector::from_fn(10, |j, _| if est[j] { 1.0 } else { 0.0 });
            let (fnr, fpr, cer) = support_rates(&beta, &B0).unwrap();
            let wrong = (0..10).filter(|&j| est[j] != (B0[j] != 0.0)).count();
            prop_assert!((cer - wrong as f64 / 10.0).abs() < 1e-15);
            prop_assert!((cer - (fnr * 3.0 + fpr * 7.0) / 10.0).abs() < 1e-12);
        }
    }
}
