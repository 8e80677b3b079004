use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_input, Result};

/// Response vector and regression matrix of a linear model `y = Xβ + u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        if y.len() != x.nrows() {
            return invalid_input(format!(
                "response has {} entries but the design has {} rows",
                y.len(),
                x.nrows()
            ));
        }
        if y.is_empty() {
            return invalid_input("dataset has no observations");
        }
        if x.ncols() == 0 {
            return invalid_input("dataset has no predictors");
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return invalid_input(format!("response entry {i} is not finite"));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            let (i, j) = (k % x.nrows(), k / x.nrows());
            return invalid_input(format!("design entry ({i}, {j}) is not finite"));
        }
        Ok(Self { y, x })
    }

    /// Builds a dataset from row-major predictor rows.
    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return invalid_input(format!("row {i} has {} entries, expected {p}", rows[i].len()));
        }
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(DVector::from_vec(y), x)
    }

    #[inline]
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    #[inline]
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn into_parts(self) -> (DVector<f64>, DMatrix<f64>) {
        (self.y, self.x)
    }

    /// `y − Xβ`.
    pub fn residuals(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.y - &self.x * beta
    }

    /// Rows selected by `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let y = DVector::from_fn(idx.len(), |k, _| self.y[idx[k]]);
        let x = DMatrix::from_fn(idx.len(), self.p(), |k, j| self.x[(idx[k], j)]);
        Dataset { y, x }
    }

    /// Columns selected by `cols`, in that order.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            y: self.y.clone(),
            x: self.x.select_columns(cols),
        }
    }

    /// Appends one observation.
    pub fn with_row(&self, y0: f64, x0: &[f64]) -> Result<Dataset> {
        if x0.len() != self.p() {
            return invalid_input(format!("point has {} predictors, expected {}", x0.len(), self.p()));
        }
        let n = self.n();
        let y = DVector::from_fn(n + 1, |i, _| if i < n { self.y[i] } else { y0 });
        let x = DMatrix::from_fn(n + 1, self.p(), |i, j| if i < n { self.x[(i, j)] } else { x0[j] });
        Dataset::new(y, x)
    }

    /// Same design with a different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Dataset> {
        Dataset::new(y, self.x.clone())
    }
}
