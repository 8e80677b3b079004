//! Robust centering and scaling with bisquare location and scale estimates.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid_input, Error, Result};
use crate::rho::{calibrate_breakdown, Bisquare};
use crate::scale::m_scale;
use crate::stats::{mad_about, median};

/// Bisquare constant for a 95%-efficient location M-estimate.
pub const LOCATION_C: f64 = 4.685;
const MAD_TO_SD: f64 = 0.6745;

/// Bisquare constant calibrated for a 50%-breakdown, normal-consistent scale.
pub fn scale_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| calibrate_breakdown(0.5).expect("0.5 is a valid breakdown level"))
}

/// Bisquare M-estimate of location, by reweighting from the median with the
/// normalized MAD as auxiliary scale.
pub fn bisquare_location(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return invalid_input("cannot locate an empty vector");
    }
    if v.iter().any(|x| !x.is_finite()) {
        return invalid_input("vector contains non-finite values");
    }
    let mut m = median(v);
    let s = mad_about(v, m) / MAD_TO_SD;
    if s == 0.0 {
        return Ok(m);
    }
    let rho = Bisquare::new(LOCATION_C)?;
    for _ in 0..500 {
        let (mut num, mut den) = (0.0, 0.0);
        for &x in v {
            let w = rho.weight((x - m) / s);
            num += w * x;
            den += w;
        }
        let next = num / den;
        let done = (next - m).abs() <= 1e-10 * s;
        m = next;
        if done {
            break;
        }
    }
    Ok(m)
}

/// Bisquare M-scale of `v` about its bisquare location.
pub fn bisquare_scale(v: &[f64]) -> Result<f64> {
    let loc = bisquare_location(v)?;
    bisquare_scale_about(v, loc, None)
}

fn bisquare_scale_about(v: &[f64], loc: f64, column: Option<usize>) -> Result<f64> {
    let centered: Vec<f64> = v.iter().map(|x| x - loc).collect();
    let s = m_scale(&centered, &Bisquare::new(scale_constant())?, 0.5)?.s;
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::DegenerateScale { column })
    }
}

/// Column centers and scales of `X` and the center of `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationMap {
    pub col_centers: Vec<f64>,
    pub col_scales: Vec<f64>,
    pub y_center: f64,
}

impl StandardizationMap {
    /// Applies the map to new data, e.g. a test sample.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.p() != self.col_centers.len() {
            return invalid_input(format!(
                "map was built for {} columns, data has {}",
                self.col_centers.len(),
                data.p()
            ));
        }
        let x = DMatrix::from_fn(data.n(), data.p(), |i, j| {
            (data.x()[(i, j)] - self.col_centers[j]) / self.col_scales[j]
        });
        let y = data.y().add_scalar(-self.y_center);
        Dataset::new(y, x)
    }

    /// Coefficients on the original predictor scale.
    pub fn destandardize_coefficients(&self, beta_std: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(beta_std.len(), |j, _| beta_std[j] / self.col_scales[j])
    }

    /// Intercept implied by the centering, for original-scale coefficients.
    pub fn intercept(&self, beta: &DVector<f64>) -> f64 {
        self.y_center - self.col_centers.iter().zip(beta.iter()).map(|(c, b)| c * b).sum::<f64>()
    }
}

/// Centers and scales every column of `X` and centers `y`.
pub fn standardize(data: &Dataset) -> Result<(Dataset, StandardizationMap)> {
    let mut col_centers = Vec::with_capacity(data.p());
    let mut col_scales = Vec::with_capacity(data.p());
    for (j, col) in data.x().column_iter().enumerate() {
        let v: Vec<f64> = col.iter().copied().collect();
        let c = bisquare_location(&v)?;
        col_scales.push(bisquare_scale_about(&v, c, Some(j))?);
        col_centers.push(c);
    }
    let map = StandardizationMap {
        col_centers,
        col_scales,
        y_center: bisquare_location(data.y().as_slice())?,
    };
    let std = map.apply(data)?;
    Ok((std, map))
}

/// Free-function form of [`StandardizationMap::destandardize_coefficients`].
pub fn destandardize_coefficients(beta_std: &DVector<f64>, map: &StandardizationMap) -> DVector<f64> {
    map.destandardize_coefficients(beta_std)
}
