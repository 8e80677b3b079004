use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;

/// Least-squares fits on `count` random subsamples of `min(p, n/2)` rows.
///
/// When the subsample has fewer rows than columns the minimum-norm solution
/// is used.
pub(crate) fn elemental_starts(data: &Dataset, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let (n, p) = (data.n(), data.p());
    let h = p.min(n / 2).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let idx = sample(&mut rng, n, h).into_vec();
        let xs = DMatrix::from_fn(h, p, |k, j| data.x()[(idx[k], j)]);
        let ys = DVector::from_fn(h, |k, _| data.y()[idx[k]]);
        let beta = xs
            .svd(true, true)
            .solve(&ys, 1e-10)
            .ok()
            .filter(|b| b.iter().all(|v| v.is_finite()))
            .unwrap_or_else(|| DVector::zeros(p));
        out.push(beta);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_data_gives_exact_starts() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(20, 3, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let data = Dataset::new(&x * &b, x).unwrap();
        let starts = elemental_starts(&data, 4, 9);
        assert_eq!(starts.len(), 4);
        for s in starts {
            assert!((s - &b).amax() < 1e-8);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let x = DMatrix::from_fn(10, 4, |i, j| (i as f64 + 1.0).powi(j as i32 % 3) + j as f64);
        let data = Dataset::new(DVector::from_fn(10, |i, _| i as f64), x).unwrap();
        assert_eq!(elemental_starts(&data, 3, 5), elemental_starts(&data, 3, 5));
    }
}
