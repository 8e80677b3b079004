//! Outliers and leverage points injected into training samples.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use taulasso::Dataset;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContaminationPlan {
    /// Response outliers `y_i ~ N(response_mean, response_sd²)` and bad
    /// leverage rows `x_i ~ N(leverage_mean·1, leverage_sd²·I)`.
    Gross {
        response_fraction: f64,
        response_mean: f64,
        response_sd: f64,
        leverage_fraction: f64,
        leverage_mean: f64,
        leverage_sd: f64,
        #[serde(default)]
        placement: RowPlacement,
    },
    /// The first `⌊fraction·n⌋` rows become `y_i = 5·ystar`, `x_i = [5, 0, …, 0]`.
    Pattern { fraction: f64, ystar: f64 },
    /// Random rows become `y_i = magnitude`, `x_ij = magnitude·g_ij` with `g_ij ~ N(0, 1)`.
    Replace { fraction: f64, magnitude: f64 },
}

impl Default for ContaminationPlan {
    fn default() -> Self {
        ContaminationPlan::Gross {
            response_fraction: 0.1,
            response_mean: 100.0,
            response_sd: 1.0,
            leverage_fraction: 0.1,
            leverage_mean: 30.0,
            leverage_sd: 1.0,
            placement: RowPlacement::Independent,
        }
    }
}

/// Where the response outliers go relative to the leverage rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowPlacement {
    /// Drawn from all rows, so they may overlap the leverage rows.
    #[default]
    Independent,
    /// Drawn from the rows without leverage points.
    Disjoint,
    /// Drawn from the leverage rows.
    Shared,
}

impl RowPlacement {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(RowPlacement::Independent),
            "disjoint" => Ok(RowPlacement::Disjoint),
            "shared" => Ok(RowPlacement::Shared),
            _ => Err(BenchError::InvalidSpec(format!("unknown row placement '{s}' (expected independent, disjoint or shared)"))),
        }
    }
}

/// Leverage rows and their values, held fixed across trials of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LeveragePoints {
    pub rows: Vec<usize>,
    pub values: DMatrix<f64>,
}

/// Which rows were altered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContaminationRecord {
    pub response_rows: Vec<usize>,
    pub leverage_rows: Vec<usize>,
}

impl ContaminationRecord {
    /// Distinct rows touched.
    pub fn altered_rows(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.response_rows.iter().chain(&self.leverage_rows).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

fn count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

fn check_fraction(f: f64, upper: f64, what: &str) -> Result<()> {
    if !(f >= 0.0 && f < upper) {
        return Err(BenchError::InvalidSpec(format!("{what} must lie in [0, {upper}), got {f}")));
    }
    Ok(())
}

impl ContaminationPlan {
    pub fn validate(&self) -> Result<()> {
        match self {
            ContaminationPlan::Gross { response_fraction, response_sd, leverage_fraction, leverage_sd, .. } => {
                check_fraction(*response_fraction, 0.5, "response fraction")?;
                check_fraction(*leverage_fraction, 0.5, "leverage fraction")?;
                if !(*response_sd >= 0.0 && *leverage_sd >= 0.0) {
                    return Err(BenchError::InvalidSpec("contamination spreads must be nonnegative".into()));
                }
                Ok(())
            }
            ContaminationPlan::Pattern { fraction, ystar } => {
                check_fraction(*fraction, 0.5, "pattern fraction")?;
                if !ystar.is_finite() {
                    return Err(BenchError::InvalidSpec("ystar must be finite".into()));
                }
                Ok(())
            }
            ContaminationPlan::Replace { fraction, magnitude } => {
                check_fraction(*fraction, 1.0, "replacement fraction")?;
                if !magnitude.is_finite() {
                    return Err(BenchError::InvalidSpec("magnitude must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Draws the leverage rows and values once for an experiment with `n × p`
    /// training samples; `None` for plans without leverage points.
    pub fn fixed_leverage<R: Rng + ?Sized>(&self, n: usize, p: usize, rng: &mut R) -> Result<Option<LeveragePoints>> {
        self.validate()?;
        match self {
            ContaminationPlan::Gross { leverage_fraction, leverage_mean, leverage_sd, .. } => {
                let m = count(*leverage_fraction, n);
                let mut rows = sample(rng, n, m).into_vec();
                rows.sort_unstable();
                let law = Normal::new(*leverage_mean, *leverage_sd).map_err(|e| BenchError::InvalidSpec(e.to_string()))?;
                let values = DMatrix::from_fn(m, p, |_, _| law.sample(rng));
                Ok(Some(LeveragePoints { rows, values }))
            }
            _ => Ok(None),
        }
    }

    /// Contaminates `data`. For the gross plan `leverage` supplies fixed
    /// leverage points; without it they are drawn here.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        data: &Dataset,
        leverage: Option<&LeveragePoints>,
        rng: &mut R,
    ) -> Result<(Dataset, ContaminationRecord)> {
        self.validate()?;
        let (n, p) = (data.n(), data.p());
        let (mut y, mut x) = data.clone().into_parts();
        let mut record = ContaminationRecord::default();
        match self {
            ContaminationPlan::Gross { response_fraction, response_mean, response_sd, placement, .. } => {
                let drawn;
                let lev = match leverage {
                    Some(l) => l,
                    None => {
                        drawn = self.fixed_leverage(n, p, rng)?.expect("gross plan has leverage");
                        &drawn
                    }
                };
                if lev.values.ncols() != p || lev.rows.iter().any(|&i| i >= n) {
                    return Err(BenchError::InvalidSpec("leverage points do not fit the sample".into()));
                }
                for (k, &i) in lev.rows.iter().enumerate() {
                    x.row_mut(i).copy_from(&lev.values.row(k));
                }
                let m = count(*response_fraction, n);
                let pool: Vec<usize> = match placement {
                    RowPlacement::Independent => (0..n).collect(),
                    RowPlacement::Disjoint => (0..n).filter(|i| !lev.rows.contains(i)).collect(),
                    RowPlacement::Shared => lev.rows.clone(),
                };
                if m > pool.len() {
                    return Err(BenchError::InvalidSpec(format!("only {} rows available for {m} response outliers", pool.len())));
                }
                let mut rows: Vec<usize> = sample(rng, pool.len(), m).into_iter().map(|k| pool[k]).collect();
                rows.sort_unstable();
                let law = Normal::new(*response_mean, *response_sd).map_err(|e| BenchError::InvalidSpec(e.to_string()))?;
                for &i in &rows {
                    y[i] = law.sample(rng);
                }
                record.response_rows = rows;
                record.leverage_rows = lev.rows.clone();
            }
            ContaminationPlan::Pattern { fraction, ystar } => {
                let m = count(*fraction, n);
                for i in 0..m {
                    y[i] = 5.0 * ystar;
                    x.row_mut(i).fill(0.0);
                    x[(i, 0)] = 5.0;
                }
                record.response_rows = (0..m).collect();
                record.leverage_rows = (0..m).collect();
            }
            ContaminationPlan::Replace { fraction, magnitude } => {
                let m = count(*fraction, n);
                let mut rows = sample(rng, n, m).into_vec();
                rows.sort_unstable();
                for &i in &rows {
                    y[i] = *magnitude;
                    for j in 0..p {
                        let g: f64 = StandardNormal.sample(rng);
                        x[(i, j)] = magnitude * g;
                    }
                }
                record.response_rows = rows.clone();
                record.leverage_rows = rows;
            }
        }
        Ok((Dataset::new(y, x)?, record))
    }
}
