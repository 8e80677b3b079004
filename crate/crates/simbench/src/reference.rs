//! Reference means at 500 trials, used as comparison columns in reports and
//! as targets by the acceptance suite. Scenario 1 carries every recorded
//! metric; the other scenarios carry the normal-error RMSE only.

use crate::pipeline::EstimatorKind;
use crate::scenario::ErrorLaw;

struct Row {
    error_law: ErrorLaw,
    contaminated: bool,
    estimator: EstimatorKind,
    metric: &'static str,
    value: f64,
}

const fn row(error_law: ErrorLaw, contaminated: bool, estimator: EstimatorKind, metric: &'static str, value: f64) -> Row {
    Row { error_law, contaminated, estimator, metric, value }
}

use EstimatorKind::{AdaptiveTauLasso as A, Oracle as O, TauLasso as T};
use ErrorLaw::{Cauchy, Normal, StudentT3};

const SCENARIO1: &[Row] = &[
    row(Normal, false, A, "rmse", 3.8621),
    row(Normal, false, A, "fnr", 0.0187),
    row(Normal, false, A, "fpr", 0.2569),
    row(Normal, false, A, "cer", 0.1854),
    row(Normal, false, T, "rmse", 3.8742),
    row(Normal, false, T, "fnr", 0.0033),
    row(Normal, false, T, "fpr", 0.4391),
    row(Normal, false, T, "cer", 0.3084),
    row(Normal, false, O, "rmse", 3.6428),
    row(StudentT3, false, A, "mad", 0.8378),
    row(StudentT3, false, A, "cer", 0.1284),
    row(StudentT3, false, T, "mad", 0.8664),
    row(StudentT3, false, T, "cer", 0.3260),
    row(StudentT3, false, O, "mad", 0.8038),
    row(Cauchy, false, A, "mad", 1.1827),
    row(Cauchy, false, A, "cer", 0.1428),
    row(Cauchy, false, T, "mad", 1.2351),
    row(Cauchy, false, T, "cer", 0.3286),
    row(Cauchy, false, O, "mad", 1.0761),
    row(Normal, true, A, "rmse", 4.8750),
    row(Normal, true, A, "fnr", 0.1587),
    row(Normal, true, A, "fpr", 0.3003),
    row(Normal, true, A, "cer", 0.2578),
    row(Normal, true, T, "rmse", 4.8539),
    row(Normal, true, T, "fnr", 0.0580),
    row(Normal, true, T, "fpr", 0.4246),
    row(Normal, true, T, "cer", 0.3146),
];

/// Normal-error RMSE of scenarios 2 to 5: (scenario, contaminated, estimator, value).
const OTHER_RMSE: &[(&str, bool, EstimatorKind, f64)] = &[
    ("scenario2", false, A, 4.5574),
    ("scenario2", false, T, 4.8986),
    ("scenario3", false, A, 1.3186),
    ("scenario3", false, T, 1.2642),
    ("scenario4", false, A, 1.2629),
    ("scenario4", false, T, 1.3021),
    ("scenario5", false, A, 0.8569),
    ("scenario5", false, T, 0.8832),
    ("scenario2", true, A, 6.9055),
    ("scenario2", true, T, 6.8249),
    ("scenario3", true, A, 1.3311),
    ("scenario3", true, T, 1.2738),
    ("scenario4", true, A, 1.3482),
    ("scenario4", true, T, 1.3241),
    ("scenario5", true, A, 0.9337),
    ("scenario5", true, T, 0.9526),
];

/// Reference mean of `metric` for the given cell, when one is recorded.
pub fn reference_value(scenario: &str, error_law: ErrorLaw, contaminated: bool, estimator: EstimatorKind, metric: &str) -> Option<f64> {
    if scenario != "scenario1" {
        if error_law != Normal || metric != "rmse" {
            return None;
        }
        return OTHER_RMSE
            .iter()
            .find(|r| r.0 == scenario && r.1 == contaminated && r.2 == estimator)
            .map(|r| r.3);
    }
    SCENARIO1
        .iter()
        .find(|r| r.error_law == error_law && r.contaminated == contaminated && r.estimator == estimator && r.metric == metric)
        .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(reference_value("scenario1", Normal, false, A, "cer"), Some(0.1854));
        assert_eq!(reference_value("scenario1", Normal, true, T, "rmse"), Some(4.8539));
        assert_eq!(reference_value("scenario2", Normal, false, A, "rmse"), Some(4.5574));
        assert_eq!(reference_value("scenario5", Normal, true, T, "rmse"), Some(0.9526));
        assert_eq!(reference_value("scenario2", StudentT3, false, A, "rmse"), None);
        assert_eq!(reference_value("scenario3", Normal, false, A, "fpr"), None);
        assert_eq!(reference_value("scenario1", Cauchy, true, A, "mad"), None);
    }
}
