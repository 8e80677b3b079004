//! Tukey bisquare loss family and tuning-constant calibration.
//!
//! With `u = (t/c)²` the bisquare loss is `ρ(t) = 1 − (1 − u)³` on `|t| ≤ c`
//! and `1` beyond. It is evaluated here in the expanded form
//! `u (3 − 3u + u²)`, which keeps full relative precision for small `t`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::quadrature::NormalQuadrature;

/// Breakdown constant of the M-scale used by the estimators (25% breakdown).
pub const DEFAULT_C0: f64 = 2.9370;
/// Efficiency constant of the tau-scale (95% normal efficiency).
pub const DEFAULT_C1: f64 = 5.1425;
/// Right-hand side of the M-scale equation.
pub const DEFAULT_DELTA: f64 = 0.25;

/// A tuned bisquare ρ-function with clipping constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bisquare {
    c: f64,
}

impl Bisquare {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return invalid_param(format!("clipping constant must be positive, got {c}"));
        }
        Ok(Self { c })
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn rho(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            1.0
        } else {
            u * (3.0 - 3.0 * u + u * u)
        }
    }

    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            6.0 * t / (self.c * self.c) * (1.0 - u).powi(2)
        }
    }

    #[inline]
    pub fn psi_prime(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            6.0 / (self.c * self.c) * (1.0 - u) * (1.0 - 5.0 * u)
        }
    }

    /// `ψ(t)/t`, extended continuously by `ψ'(0) = 6/c²` at the origin.
    #[inline]
    pub fn weight(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            6.0 / (self.c * self.c) * (1.0 - u).powi(2)
        }
    }

    /// `ψ(t)·t`.
    #[inline]
    pub fn psi_times_t(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            6.0 * u * (1.0 - u).powi(2)
        }
    }

    /// `2ρ(t) − ψ(t)·t = u²(6 − 4u)`, nonnegative everywhere.
    #[inline]
    pub fn two_rho_minus_psi_t(&self, t: f64) -> f64 {
        let u = (t / self.c).powi(2);
        if u >= 1.0 {
            2.0
        } else {
            u * u * (6.0 - 4.0 * u)
        }
    }

    /// Inverse of `ρ` on `[0, c]`: the `t ≥ 0` with `ρ(t) = level`.
    pub fn inverse_rho(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return invalid_param(format!("rho level must lie in (0, 1), got {level}"));
        }
        // 1 − (1 − u)³ = level  ⇒  u = 1 − (1 − level)^(1/3)
        let u = 1.0 - (1.0 - level).cbrt();
        Ok(self.c * u.sqrt())
    }

    /// `E[ρ(Z)]` for standard normal `Z` by quadrature.
    pub fn normal_mean_rho(&self, q: &NormalQuadrature) -> f64 {
        q.expect(|z| self.rho(z))
    }
}

/// Free-function form of `ρ(t; c)`.
pub fn rho(t: f64, c: f64) -> Result<f64> {
    Ok(Bisquare::new(c)?.rho(t))
}

/// Free-function form of `ψ(t; c) = dρ/dt`.
pub fn psi(t: f64, c: f64) -> Result<f64> {
    Ok(Bisquare::new(c)?.psi(t))
}

/// Free-function form of `ψ'(t; c) = d²ρ/dt²`.
pub fn psi_prime(t: f64, c: f64) -> Result<f64> {
    Ok(Bisquare::new(c)?.psi_prime(t))
}

/// Finds `c` with `E_Φ[ρ(Z; c)] = delta`.
///
/// The expectation uses the shared Gauss–Hermite rule and `c` is located by
/// bisection on `[0.1, 20]`, where the expectation is monotone decreasing.
pub fn calibrate_breakdown(delta: f64) -> Result<f64> {
    calibrate_breakdown_with(delta, NormalQuadrature::standard())
}

pub fn calibrate_breakdown_with(delta: f64, q: &NormalQuadrature) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return invalid_param(format!("delta must lie in (0, 0.5], got {delta}"));
    }
    let f = |c: f64| Bisquare { c }.normal_mean_rho(q) - delta;
    let (mut lo, mut hi) = (0.1_f64, 20.0_f64);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return invalid_param(format!("delta {delta} is not bracketed on [0.1, 20]"));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The pair of ρ-functions used by the tau-scale, plus the M-scale level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPair {
    pub c0: f64,
    pub c1: f64,
    pub delta: f64,
}

impl Default for TuningPair {
    fn default() -> Self {
        Self {
            c0: DEFAULT_C0,
            c1: DEFAULT_C1,
            delta: DEFAULT_DELTA,
        }
    }
}

impl TuningPair {
    pub fn new(c0: f64, c1: f64, delta: f64) -> Result<Self> {
        let pair = Self { c0, c1, delta };
        pair.validate()?;
        Ok(pair)
    }

    /// Calibrates `c0` for the given breakdown level and keeps `c1`.
    pub fn for_breakdown(delta: f64, c1: f64) -> Result<Self> {
        Self::new(calibrate_breakdown(delta)?, c1, delta)
    }

    pub fn validate(&self) -> Result<()> {
        Bisquare::new(self.c0)?;
        Bisquare::new(self.c1)?;
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return invalid_param(format!("delta must lie in (0, 0.5], got {}", self.delta));
        }
        if self.c1 <= self.c0 {
            return invalid_param(format!(
                "c1 ({}) must exceed c0 ({})",
                self.c1, self.c0
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn rho0(&self) -> Bisquare {
        Bisquare { c: self.c0 }
    }

    #[inline]
    pub fn rho1(&self) -> Bisquare {
        Bisquare { c: self.c1 }
    }
}
