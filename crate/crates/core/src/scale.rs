//! M-scale and tau-scale of residual vectors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};
use crate::rho::{Bisquare, TuningPair};

const MAX_ITER: usize = 200;
/// Target for `|mean ρ0(r/s) − δ|` at convergence.
const EQUATION_TOL: f64 = 1e-12;

/// Result of a scale computation. For a bare M-scale, `tau` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub s: f64,
    pub tau: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_residuals(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return invalid_input("residual vector is empty");
    }
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return invalid_input(format!("residual {i} is not finite"));
    }
    Ok(())
}

#[inline]
fn mean_rho(r: &[f64], rho: &Bisquare, s: f64) -> f64 {
    r.iter().map(|&v| rho.rho(v / s)).sum::<f64>() / r.len() as f64
}

/// Solves `(1/n) Σ ρ0(r_i/s) = δ` for `s`.
pub fn m_scale(r: &[f64], rho0: &Bisquare, delta: f64) -> Result<ScaleEstimate> {
    m_scale_with_hint(r, rho0, delta, None)
}

/// [`m_scale`] started from `hint` when it is a usable positive value.
///
/// A handful of fixed-point steps `s ← s·sqrt(mean ρ0(r/s)/δ)` are followed by
/// safeguarded Newton steps inside a bracket that always contains the root;
/// whenever a Newton step leaves the bracket it is replaced by bisection.
pub fn m_scale_with_hint(
    r: &[f64],
    rho0: &Bisquare,
    delta: f64,
    hint: Option<f64>,
) -> Result<ScaleEstimate> {
    check_residuals(r)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 0.5], got {delta}"
        )));
    }
    let n = r.len() as f64;
    let max_abs = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let zeros = r.iter().filter(|v| **v == 0.0).count() as f64;
    // With a zero fraction of at least 1 − δ the left side stays ≤ δ for all
    // s > 0 and only reaches δ in the limit s → 0.
    if max_abs == 0.0 || zeros / n >= 1.0 - delta {
        return Ok(ScaleEstimate {
            s: 0.0,
            tau: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let g = |s: f64| mean_rho(r, rho0, s) - delta;
    // g is nonincreasing in s; g(lo) > 0 since more than δ of the mass sits
    // at nonzero residuals, and g(hi) ≤ 0 since every |r/hi| ≤ ρ⁻¹(δ).
    let mut lo = 1e-12 * max_abs;
    let mut hi = max_abs / rho0.inverse_rho(delta)?;

    let mut s = match hint {
        Some(h) if h.is_finite() && h > lo && h < hi => h,
        _ => {
            let med = median_abs(r);
            if med > lo && med / 0.6745 < hi {
                med / 0.6745
            } else {
                0.5 * (lo + hi)
            }
        }
    };

    let mut iterations = 0;
    let mut fixed_point_steps = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let gs = g(s);
        if gs.abs() < EQUATION_TOL {
            return Ok(finish(s, iterations, true));
        }
        if gs > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return Ok(finish(s, iterations, true));
        }
        let next = if fixed_point_steps < 3 {
            fixed_point_steps += 1;
            s * ((gs + delta) / delta).sqrt()
        } else {
            // dg/ds = −(1/(n s)) Σ ψ0(t) t
            let slope = -r.iter().map(|&v| rho0.psi_times_t(v / s)).sum::<f64>() / (n * s);
            if slope < 0.0 {
                s - gs / slope
            } else {
                f64::NAN
            }
        };
        s = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    let converged = g(s).abs() < 1e-9;
    Ok(finish(s, iterations, converged))
}

fn finish(s: f64, iterations: usize, converged: bool) -> ScaleEstimate {
    ScaleEstimate {
        s,
        tau: 0.0,
        iterations,
        converged,
    }
}

fn median_abs(r: &[f64]) -> f64 {
    let mut a: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    crate::stats::median_in_place(&mut a)
}

/// tau-scale: `τ² = s² · (1/n) Σ ρ1(r_i/s)` with `s` the M-scale under ρ0.
pub fn tau_scale(r: &[f64], tuning: &TuningPair) -> Result<ScaleEstimate> {
    tau_scale_with_hint(r, tuning, None)
}

pub fn tau_scale_with_hint(
    r: &[f64],
    tuning: &TuningPair,
    hint: Option<f64>,
) -> Result<ScaleEstimate> {
    let mut est = m_scale_with_hint(r, &tuning.rho0(), tuning.delta, hint)?;
    if est.s > 0.0 {
        let rho1 = tuning.rho1();
        est.tau = est.s * mean_rho(r, &rho1, est.s).sqrt();
    }
    Ok(est)
}

/// Weight `W̄` that makes the tau-scale gradient equal to that of an M-type
/// loss with `ψ = W̄ ψ0 + ψ1`:
///
/// `W̄ = Σ [2ρ1(t_i) − ψ1(t_i) t_i] / Σ ψ0(t_i) t_i`, `t_i = r_i / s`.
///
/// Fails with [`Error::DegenerateWeight`] when every `|t_i| ≥ c0`.
pub fn combined_psi_weight(r: &[f64], s: f64, tuning: &TuningPair) -> Result<f64> {
    check_residuals(r)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {s}"
        )));
    }
    let (rho0, rho1) = (tuning.rho0(), tuning.rho1());
    let mut num = 0.0;
    let mut den = 0.0;
    for &v in r {
        let t = v / s;
        num += rho1.two_rho_minus_psi_t(t);
        den += rho0.psi_times_t(t);
    }
    if !(den > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateWeight { denominator: den });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rho::DEFAULT_C0;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn rho0() -> Bisquare {
        Bisquare::new(DEFAULT_C0).unwrap()
    }

    /// Independent root of ρ(a/s) = δ in s by plain bisection.
    fn bisect_constant(a: f64, rho: &Bisquare, delta: f64) -> f64 {
        let (mut lo, mut hi) = (1e-6 * a, 1e6 * a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rho.rho(a / mid) > delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn constant_residuals_match_bisection() {
        for a in [1e-3, 0.7, 2.0, 1e4] {
            let r = vec![a; 17];
            let s = m_scale(&r, &rho0(), 0.25).unwrap().s;
            let want = bisect_constant(a, &rho0(), 0.25);
            assert!((s - want).abs() < 1e-9 * want, "a={a}: {s} vs {want}");
        }
    }

    #[test]
    fn zero_residuals_give_zero_scale() {
        let est = tau_scale(&[0.0; 8], &TuningPair::default()).unwrap();
        assert_eq!(est.s, 0.0);
        assert_eq!(est.tau, 0.0);
    }

    #[test]
    fn zero_fraction_boundary() {
        // 3 zeros out of 4: fraction equals 1 − δ, no positive root.
        let r = [0.0, 0.0, 0.0, 1.0];
        assert_eq!(m_scale(&r, &rho0(), 0.25).unwrap().s, 0.0);
        let r = [0.0, 0.0, 1.0, 1.0];
        assert!(m_scale(&r, &rho0(), 0.25).unwrap().s > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(m_scale(&[], &rho0(), 0.25), Err(Error::InvalidInput(_))));
        assert!(matches!(
            m_scale(&[1.0, f64::NAN], &rho0(), 0.25),
            Err(Error::InvalidInput(_))
        ));
        assert!(m_scale(&[1.0], &rho0(), 0.7).is_err());
    }

    #[test]
    fn normal_sample_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = m_scale(&r, &rho0(), 0.25).unwrap().s;
        assert!((s - 1.0).abs() < 0.01, "{s}");
    }

    #[test]
    fn single_residual_substitution() {
        let tuning = TuningPair::default();
        let a = 3.3;
        let est = tau_scale(&[a], &tuning).unwrap();
        let s = bisect_constant(a, &tuning.rho0(), tuning.delta);
        assert!((est.s - s).abs() < 1e-9 * s);
        let tau2 = s * s * tuning.rho1().rho(a / s);
        assert!((est.tau * est.tau - tau2).abs() < 1e-9 * tau2);
    }

    #[test]
    fn weight_small_residual_limit() {
        let tuning = TuningPair::default();
        let u = [0.3, -1.2, 0.8, 2.0, -0.5];
        let eps = 1e-4;
        let r: Vec<f64> = u.iter().map(|v| eps * v).collect();
        let w = combined_psi_weight(&r, 1.0, &tuning).unwrap();
        // 2ρ1 − ψ1 t ≈ 6 t⁴/c1⁴ and ψ0 t ≈ 6 t²/c0²
        let s4: f64 = u.iter().map(|v| v.powi(4)).sum();
        let s2: f64 = u.iter().map(|v| v.powi(2)).sum();
        let want = eps * eps * tuning.c0.powi(2) * s4 / (tuning.c1.powi(4) * s2);
        assert!(((w - want) / want).abs() < 1e-4, "{w} vs {want}");
    }

    #[test]
    fn weight_degenerate_when_saturated() {
        let tuning = TuningPair::default();
        let r = [10.0, -12.0, 30.0];
        assert!(matches!(
            combined_psi_weight(&r, 1.0, &tuning),
            Err(Error::DegenerateWeight { .. })
        ));
    }

    #[test]
    fn weight_nonnegative_on_random_vectors() {
        let tuning = TuningPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r: Vec<f64> = (0..20)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    3.0 * z
                })
                .collect();
            let s = m_scale(&r, &tuning.rho0(), tuning.delta).unwrap().s;
            if let Ok(w) = combined_psi_weight(&r, s, &tuning) {
                assert!(w >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn scale_equivariance(
            r in proptest::collection::vec(-100.0f64..100.0, 1..40),
            a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
        ) {
            let tuning = TuningPair::default();
            let e1 = tau_scale(&r, &tuning).unwrap();
            let ra: Vec<f64> = r.iter().map(|v| a * v).collect();
            let e2 = tau_scale(&ra, &tuning).unwrap();
            prop_assert!((e2.s - a.abs() * e1.s).abs() <= 1e-8 * (1.0 + e2.s));
            prop_assert!((e2.tau - a.abs() * e1.tau).abs() <= 1e-8 * (1.0 + e2.tau));
        }

        #[test]
        fn bounds_and_fixed_point(r in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            let tuning = TuningPair::default();
            let rho0 = tuning.rho0();
            let e = tau_scale(&r, &tuning).unwrap();
            let max_abs = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(e.s >= 0.0);
            prop_assert!(e.s <= max_abs / rho0.inverse_rho(tuning.delta).unwrap() * (1.0 + 1e-12));
            prop_assert!(e.tau <= e.s * (1.0 + 1e-12));
            if e.s > 0.0 {
                prop_assert!(e.converged);
                prop_assert!((mean_rho(&r, &rho0, e.s) - tuning.delta).abs() < 1e-9);
            }
        }
    }
}
