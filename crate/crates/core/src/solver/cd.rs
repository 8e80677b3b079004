//! Cyclic coordinate descent for the observation-weighted lasso
//! `(1/(2n)) Σ ω_i (y_i − x_iᵀβ)² + λ‖β‖₁`.

use nalgebra::{DMatrix, DVector};

#[inline]
pub(crate) fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub(crate) struct WeightedLasso<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    w: &'a [f64],
    lambda: f64,
    /// `(1/n) Σ ω_i x_ij²`
    curvature: Vec<f64>,
    /// `(1/n) Σ ω_i y_i²`, the reference for the stopping rule.
    y_energy: f64,
}

impl<'a> WeightedLasso<'a> {
    pub(crate) fn new(x: &'a DMatrix<f64>, y: &'a DVector<f64>, w: &'a [f64], lambda: f64) -> Self {
        let n = x.nrows() as f64;
        let curvature = x
            .column_iter()
            .map(|col| col.iter().zip(w).map(|(v, wi)| wi * v * v).sum::<f64>() / n)
            .collect();
        let y_energy = y.iter().zip(w).map(|(v, wi)| wi * v * v).sum::<f64>() / n;
        Self { x, y, w, lambda, curvature, y_energy }
    }

    /// One pass over `coords`; returns the largest weighted coefficient move.
    fn sweep(&self, beta: &mut DVector<f64>, resid: &mut DVector<f64>, coords: &[usize]) -> f64 {
        let n = self.x.nrows() as f64;
        let mut biggest = 0.0_f64;
        for &j in coords {
            let a = self.curvature[j];
            let old = beta[j];
            let col = self.x.column(j);
            let new = if a > 0.0 {
                let mut g = 0.0;
                for i in 0..col.len() {
                    g += self.w[i] * col[i] * resid[i];
                }
                soft_threshold(g / n + a * old, self.lambda) / a
            } else {
                0.0
            };
            let d = new - old;
            if d != 0.0 {
                beta[j] = new;
                resid.axpy(-d, &col, 1.0);
                biggest = biggest.max(a.sqrt() * d.abs());
            }
        }
        biggest
    }

    /// Minimizes in place from the warm start `beta`. Returns the number of sweeps.
    pub(crate) fn solve(&self, beta: &mut DVector<f64>, tol: f64, max_sweeps: usize) -> usize {
        let p = self.x.ncols();
        let all: Vec<usize> = (0..p).collect();
        let mut resid = self.y - self.x * &*beta;
        let threshold = tol * self.y_energy.sqrt().max(f64::MIN_POSITIVE);
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            if self.sweep(beta, &mut resid, &all) <= threshold {
                break;
            }
            // settle the active set before the next full pass
            let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
            while sweeps < max_sweeps {
                sweeps += 1;
                if self.sweep(beta, &mut resid, &active) <= threshold {
                    break;
                }
            }
        }
        sweeps
    }
}
