//! CSV and JSON serialization of experiment reports.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{BreakdownReport, GrossBreakdownReport, IfValidation, OvershrinkReport, TableReport};
use crate::metrics::METRIC_NAMES;
use crate::pipeline::EstimatorKind;
use crate::reference::reference_value;

/// Pretty JSON of any report; it carries its resolved configuration.
pub fn write_json<W: Write, T: Serialize>(out: W, report: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

/// One row per scenario × estimator × error law × metric.
pub fn write_table_csv<W: Write>(out: W, report: &TableReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario", "error_law", "contaminated", "estimator", "metric", "mean", "se", "trials", "failed", "reference",
    ])?;
    for c in &report.cells {
        for name in METRIC_NAMES {
            let stat = c.metric(name).expect("known metric");
            let reference = reference_value(&c.scenario, c.error_law, c.contaminated, c.estimator, name)
                .map(|v| v.to_string())
                .unwrap_or_default();
            w.write_record([
                c.scenario.clone(),
                c.error_law.name().to_string(),
                c.contaminated.to_string(),
                c.estimator.name().to_string(),
                name.to_string(),
                stat.mean.to_string(),
                stat.se.to_string(),
                c.trials.to_string(),
                c.failed.to_string(),
                reference,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_breakdown_csv<W: Write>(out: W, report: &BreakdownReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ystar", "estimator", "rmse", "se", "trials", "failed"])?;
    for p in &report.points {
        w.write_record([
            p.ystar.to_string(),
            p.estimator.name().to_string(),
            p.rmse.mean.to_string(),
            p.rmse.se.to_string(),
            p.rmse.count.to_string(),
            p.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per estimator × trial.
pub fn write_gross_breakdown_csv<W: Write>(out: W, reports: &[GrossBreakdownReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "trial", "clean_norm", "contaminated_norm", "within_bound"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for report in reports {
        for r in &report.rows {
            w.write_record([
                report.config.estimator.name().to_string(),
                r.trial.to_string(),
                opt(r.clean_norm),
                opt(r.contaminated_norm),
                r.within(report.config.bound_factor).map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per λ × estimator × coefficient.
pub fn write_overshrink_csv<W: Write>(out: W, report: &OvershrinkReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "estimator", "coefficient", "mean_bias", "se"])?;
    for path in &report.paths {
        for (l, lambda) in report.lambda_grid.iter().enumerate() {
            for (c, j) in path.coefficients.iter().enumerate() {
                w.write_record([
                    lambda.to_string(),
                    path.estimator.name().to_string(),
                    (j + 1).to_string(),
                    path.mean_bias[l][c].to_string(),
                    path.se[l][c].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `y0, x0…, if_scale, if_beta…, sc_scale, sc_beta…` for the adaptive
/// estimator, or the tau-Lasso pilot when `pilot` is set.
pub fn write_influence_csv<W: Write>(out: W, report: &IfValidation, pilot: bool) -> Result<()> {
    let r = if pilot { &report.tau_lasso } else { &report.adaptive };
    let p = r.grid.first().map(|g| g.1.len()).unwrap_or(0);
    let mut header = vec!["y0".to_string()];
    header.extend((1..=p).map(|j| format!("x0_{j}")));
    for kind in ["if", "sc"] {
        header.push(format!("{kind}_scale"));
        header.extend((1..=p).map(|j| format!("{kind}_beta{j}")));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for (k, (y0, x0)) in r.grid.iter().enumerate() {
        let mut row = vec![y0.to_string()];
        row.extend(x0.iter().map(|v| v.to_string()));
        row.extend(r.if_values[k].iter().map(|v| v.to_string()));
        row.extend(r.sc_values[k].iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Estimators reported by the table CSV, in display order.
pub fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::AdaptiveTauLasso, EstimatorKind::TauLasso, EstimatorKind::Oracle]
}
