//! Gauss–Hermite quadrature for expectations under the standard normal.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// Number of nodes used by [`NormalQuadrature::standard`].
pub const DEFAULT_NODES: usize = 128;

/// Nodes and weights such that `Σ w_k f(z_k) ≈ E[f(Z)]`, `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct NormalQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalQuadrature {
    /// Builds an `n`-point rule for the probabilists' Hermite weight via the
    /// Golub–Welsch eigenproblem on the Jacobi matrix.
    pub fn gauss_hermite(n: usize) -> Self {
        assert!(n >= 2, "quadrature needs at least two nodes");
        // He_{k+1} = z He_k - k He_{k-1}; orthonormal recurrence has
        // off-diagonal sqrt(k) and zero diagonal.
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // symmetrize to remove eigen-solver jitter
        for k in 0..n / 2 {
            let m = n - 1 - k;
            let z = 0.5 * (pairs[m].0 - pairs[k].0);
            let w = 0.5 * (pairs[m].1 + pairs[k].1);
            pairs[k] = (-z, w);
            pairs[m] = (z, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    /// Shared default rule with [`DEFAULT_NODES`] nodes.
    pub fn standard() -> &'static NormalQuadrature {
        static RULE: OnceLock<NormalQuadrature> = OnceLock::new();
        RULE.get_or_init(|| NormalQuadrature::gauss_hermite(DEFAULT_NODES))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `E[f(Z)]` for standard normal `Z`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_normal_moments() {
        let q = NormalQuadrature::gauss_hermite(64);
        assert!((q.expect(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!(q.expect(|z| z).abs() < 1e-12);
        assert!((q.expect(|z| z * z) - 1.0).abs() < 1e-12);
        assert!((q.expect(|z| z.powi(4)) - 3.0).abs() < 1e-10);
        assert!((q.expect(|z| z.powi(6)) - 15.0).abs() < 1e-9);
    }

    #[test]
    fn integrates_smooth_functions() {
        let q = NormalQuadrature::standard();
        assert!((q.expect(f64::exp) - 0.5f64.exp()).abs() < 1e-12);
        assert!((q.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-12);
    }
}
