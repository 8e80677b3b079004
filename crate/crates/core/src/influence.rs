//! Influence functions of the tau-Lasso and adaptive tau-Lasso, written as
//! regularized M-estimators in `θ = (s, β)` with estimating function
//!
//! `Ψ(z, θ) = [ρ0(r̃) − δ, −ψ(r̃) x s]`, `r̃ = (y − xᵀβ)/s`, `ψ = W̄ψ0 + ψ1`,
//!
//! and the finite-sample sensitivity curve used to check them. `W̄` is held
//! at its value under the distribution being perturbed.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::quadrature::NormalQuadrature;
use crate::rho::{Bisquare, TuningPair};
use crate::solver::FitResult;

/// Condition number above which an expectation matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Default number of model draws for [`ExpectationEngine::from_model`].
pub const DEFAULT_MODEL_DRAWS: usize = 1_000_000;

/// Asymptotic value `(s_∞, β_∞)` of an estimator at penalty `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub s_inf: f64,
    pub beta_inf: DVector<f64>,
    pub lambda: f64,
}

impl FunctionalValue {
    pub fn new(s_inf: f64, beta_inf: DVector<f64>, lambda: f64) -> Result<Self> {
        if !(s_inf.is_finite() && s_inf > 0.0) {
            return invalid_param(format!("functional scale must be positive, got {s_inf}"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return invalid_param(format!("lambda must be nonnegative, got {lambda}"));
        }
        Ok(Self { s_inf, beta_inf, lambda })
    }

    /// Uses a (large-sample) fit as a stand-in for the functional.
    pub fn from_fit(fit: &FitResult) -> Result<Self> {
        Self::new(fit.s, fit.beta.clone(), fit.lambda)
    }

    pub fn p(&self) -> usize {
        self.beta_inf.len()
    }

    /// Indices of the nonzero coefficients.
    pub fn active(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.beta_inf[j] != 0.0).collect()
    }

    pub fn k_s(&self) -> usize {
        self.active().len()
    }
}

/// `ψ = W̄ψ0 + ψ1` with `W̄` fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedPsi {
    rho0: Bisquare,
    rho1: Bisquare,
    pub wbar: f64,
}

impl CombinedPsi {
    pub fn new(tuning: &TuningPair, wbar: f64) -> Self {
        Self { rho0: tuning.rho0(), rho1: tuning.rho1(), wbar }
    }

    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        self.wbar * self.rho0.psi(t) + self.rho1.psi(t)
    }

    #[inline]
    pub fn psi_prime(&self, t: f64) -> f64 {
        self.wbar * self.rho0.psi_prime(t) + self.rho1.psi_prime(t)
    }
}

/// Expectations that enter the influence functions, all evaluated at the
/// standardized residual `r̃` of a functional value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    /// `E[ρ0(r̃)]`
    Rho0,
    /// `E[ψ0(r̃)]`
    Psi0,
    /// `E[ψ0(r̃) r̃]`
    Psi0TimesResidual,
    /// `E[2ρ1(r̃) − ψ1(r̃) r̃]`
    TauWeightNumerator,
    /// `E[ψ0(r̃) x]`
    Psi0X,
    /// `E[ψ(r̃) x]`
    PsiX,
    /// `E[(s ∂ψ(r̃)/∂s + ψ(r̃)) x] = E[(ψ(r̃) − ψ'(r̃) r̃) x]`
    ScaleSlopeX,
    /// `E[ψ'(r̃) x xᵀ]`
    PsiPrimeXXt,
}

/// Estimate of an expectation with its Monte-Carlo standard error, entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub value: DMatrix<f64>,
    pub std_error: DMatrix<f64>,
    pub samples: usize,
    pub warning: Option<String>,
}

impl MomentEstimate {
    pub fn scalar(&self) -> f64 {
        self.value[(0, 0)]
    }
}

/// Averages over a sample of `(y, x)` pairs drawn from (or forming) `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationEngine {
    y: DVector<f64>,
    x: DMatrix<f64>,
}

impl ExpectationEngine {
    /// The empirical distribution of `data`.
    pub fn from_sample(data: &Dataset) -> Self {
        Self { y: data.y().clone(), x: data.x().clone() }
    }

    /// `draws` pairs from `sampler`, seeded deterministically.
    pub fn from_model<F>(draws: usize, seed: u64, mut sampler: F) -> Result<Self>
    where
        F: FnMut(&mut ChaCha8Rng) -> (f64, Vec<f64>),
    {
        if draws == 0 {
            return invalid_param("need at least one model draw");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ys = Vec::with_capacity(draws);
        let mut rows = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (y, x) = sampler(&mut rng);
            ys.push(y);
            rows.push(x);
        }
        let data = Dataset::from_rows(ys, &rows)?;
        Ok(Self::from_sample(&data))
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    fn residuals(&self, f: &FunctionalValue) -> Result<Vec<f64>> {
        if f.p() != self.p() {
            return invalid_input(format!("functional has {} coefficients, sample has {} predictors", f.p(), self.p()));
        }
        let r = &self.y - &self.x * &f.beta_inf;
        Ok(r.iter().map(|v| v / f.s_inf).collect())
    }

    /// `W̄` under this distribution at `f`.
    pub fn tau_weight(&self, f: &FunctionalValue, tuning: &TuningPair) -> Result<f64> {
        let t = self.residuals(f)?;
        let (rho0, rho1) = (tuning.rho0(), tuning.rho1());
        let num: f64 = t.iter().map(|&v| rho1.two_rho_minus_psi_t(v)).sum();
        let den: f64 = t.iter().map(|&v| rho0.psi_times_t(v)).sum();
        if !(den > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateWeight { denominator: den });
        }
        Ok(num / den)
    }

    pub fn estimate(&self, moment: Moment, f: &FunctionalValue, psi: &CombinedPsi) -> Result<MomentEstimate> {
        let t = self.residuals(f)?;
        let n = t.len();
        let p = self.p();
        let (rows, cols) = match moment {
            Moment::Rho0 | Moment::Psi0 | Moment::Psi0TimesResidual | Moment::TauWeightNumerator => (1, 1),
            Moment::Psi0X | Moment::PsiX | Moment::ScaleSlopeX => (p, 1),
            Moment::PsiPrimeXXt => (p, p),
        };
        let mut sum = DMatrix::<f64>::zeros(rows, cols);
        let mut sum_sq = DMatrix::<f64>::zeros(rows, cols);
        let mut add = |i: usize, j: usize, v: f64| {
            sum[(i, j)] += v;
            sum_sq[(i, j)] += v * v;
        };
        for (k, &r) in t.iter().enumerate() {
            let x = self.x.row(k);
            match moment {
                Moment::Rho0 => add(0, 0, psi.rho0.rho(r)),
                Moment::Psi0 => add(0, 0, psi.rho0.psi(r)),
                Moment::Psi0TimesResidual => add(0, 0, psi.rho0.psi_times_t(r)),
                Moment::TauWeightNumerator => add(0, 0, psi.rho1.two_rho_minus_psi_t(r)),
                Moment::Psi0X => {
                    let a = psi.rho0.psi(r);
                    for j in 0..p {
                        add(j, 0, a * x[j]);
                    }
                }
                Moment::PsiX => {
                    let a = psi.psi(r);
                    for j in 0..p {
                        add(j, 0, a * x[j]);
                    }
                }
                Moment::ScaleSlopeX => {
                    let a = psi.psi(r) - psi.psi_prime(r) * r;
                    for j in 0..p {
                        add(j, 0, a * x[j]);
                    }
                }
                Moment::PsiPrimeXXt => {
                    let a = psi.psi_prime(r);
                    for i in 0..p {
                        for j in 0..p {
                            add(i, j, a * x[i] * x[j]);
                        }
                    }
                }
            }
        }
        let nf = n as f64;
        let value = &sum / nf;
        let std_error = DMatrix::from_fn(rows, cols, |i, j| {
            if n < 2 {
                return f64::INFINITY;
            }
            let var = (sum_sq[(i, j)] / nf - value[(i, j)].powi(2)).max(0.0) * nf / (nf - 1.0);
            (var / nf).sqrt()
        });
        let wide = std_error.iter().zip(value.iter()).any(|(se, v)| *se > 0.1 * v.abs().max(1e-3));
        let warning = wide.then(|| format!("{moment:?}: standard error is wide relative to the estimate ({n} samples)"));
        Ok(MomentEstimate { value, std_error, samples: n, warning })
    }
}

/// `M` (or `N`) on the active block: rows/columns ordered as `(s, β_a)`.
fn expectation_matrix(engine: &ExpectationEngine, f: &FunctionalValue, psi: &CombinedPsi, active: &[usize]) -> Result<DMatrix<f64>> {
    let k = active.len();
    let s = f.s_inf;
    let psi0_r = engine.estimate(Moment::Psi0TimesResidual, f, psi)?.scalar();
    let psi0_x = engine.estimate(Moment::Psi0X, f, psi)?.value;
    let slope_x = engine.estimate(Moment::ScaleSlopeX, f, psi)?.value;
    let xx = engine.estimate(Moment::PsiPrimeXXt, f, psi)?.value;
    let mut m = DMatrix::zeros(k + 1, k + 1);
    m[(0, 0)] = -psi0_r / s;
    for (a, &j) in active.iter().enumerate() {
        m[(0, a + 1)] = -psi0_x[(j, 0)] / s;
        m[(a + 1, 0)] = -slope_x[(j, 0)];
        for (b, &l) in active.iter().enumerate() {
            m[(a + 1, b + 1)] = xx[(j, l)];
        }
    }
    Ok(m)
}

/// Inverse via SVD, refusing ill-conditioned matrices.
fn checked_inverse(m: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularExpectation { condition });
    }
    let inv = svd
        .pseudo_inverse(0.0)
        .map_err(|_| Error::SingularExpectation { condition })?;
    Ok((inv, condition))
}

/// `Ψ(z0, θ)` in full `(p+1)` coordinates.
fn score(y0: f64, x0: &[f64], f: &FunctionalValue, psi: &CombinedPsi, delta: f64) -> DVector<f64> {
    let fit: f64 = x0.iter().zip(f.beta_inf.iter()).map(|(a, b)| a * b).sum();
    let t = (y0 - fit) / f.s_inf;
    let mut out = DVector::zeros(f.p() + 1);
    out[0] = psi.rho0.rho(t) - delta;
    let g = psi.psi(t) * f.s_inf;
    for j in 0..f.p() {
        out[j + 1] = -g * x0[j];
    }
    out
}

fn check_point(x0: &[f64], p: usize) -> Result<()> {
    if x0.len() != p {
        return invalid_input(format!("contamination point has {} predictors, expected {p}", x0.len()));
    }
    Ok(())
}

/// Influence function of the tau-Lasso at a fixed functional value.
#[derive(Debug, Clone)]
pub struct TauLassoInfluence {
    functional: FunctionalValue,
    psi: CombinedPsi,
    delta: f64,
    active: Vec<usize>,
    m_inv: DMatrix<f64>,
    pub condition: f64,
}

impl TauLassoInfluence {
    pub fn new(functional: &FunctionalValue, engine: &ExpectationEngine, tuning: &TuningPair) -> Result<Self> {
        let wbar = engine.tau_weight(functional, tuning)?;
        let psi = CombinedPsi::new(tuning, wbar);
        let active = functional.active();
        let m = expectation_matrix(engine, functional, &psi, &active)?;
        let (m_inv, condition) = checked_inverse(m)?;
        Ok(Self { functional: functional.clone(), psi, delta: tuning.delta, active, m_inv, condition })
    }

    pub fn wbar(&self) -> f64 {
        self.psi.wbar
    }

    /// `IF(z0) = −blockdiag(M⁻¹, 0) (Ψ(z0, T) + q′(T; λ))`, as `(s, β_1..β_p)`.
    pub fn evaluate(&self, y0: f64, x0: &[f64]) -> Result<DVector<f64>> {
        let f = &self.functional;
        check_point(x0, f.p())?;
        let full = score(y0, x0, f, &self.psi, self.delta);
        let k = self.active.len();
        let mut rhs = DVector::zeros(k + 1);
        rhs[0] = full[0];
        for (a, &j) in self.active.iter().enumerate() {
            rhs[a + 1] = full[j + 1] + f.lambda * f.beta_inf[j].signum();
        }
        let sol = -(&self.m_inv * rhs);
        let mut out = DVector::zeros(f.p() + 1);
        out[0] = sol[0];
        for (a, &j) in self.active.iter().enumerate() {
            out[j + 1] = sol[a + 1];
        }
        Ok(out)
    }
}

/// Free-function form of [`TauLassoInfluence::evaluate`].
pub fn if_tau_lasso(
    y0: f64,
    x0: &[f64],
    functional: &FunctionalValue,
    engine: &ExpectationEngine,
    tuning: &TuningPair,
) -> Result<DVector<f64>> {
    TauLassoInfluence::new(functional, engine, tuning)?.evaluate(y0, x0)
}

/// Influence function of the adaptive tau-Lasso with a tau-Lasso pilot and
/// weights `1/|β̲_j|`.
#[derive(Debug, Clone)]
pub struct AdaptiveTauLassoInfluence {
    functional: FunctionalValue,
    pilot: FunctionalValue,
    psi: CombinedPsi,
    delta: f64,
    active: Vec<usize>,
    n_inv: DMatrix<f64>,
    pub condition: f64,
}

impl AdaptiveTauLassoInfluence {
    pub fn new(
        functional: &FunctionalValue,
        pilot: &FunctionalValue,
        engine: &ExpectationEngine,
        tuning: &TuningPair,
    ) -> Result<Self> {
        if pilot.p() != functional.p() {
            return invalid_input("pilot and estimator have different dimensions");
        }
        let active = functional.active();
        if let Some(&j) = active.iter().find(|&&j| pilot.beta_inf[j] == 0.0) {
            return Err(Error::InconsistentSupport(format!(
                "coefficient {j} is active but its pilot value is zero"
            )));
        }
        let wbar = engine.tau_weight(functional, tuning)?;
        let psi = CombinedPsi::new(tuning, wbar);
        let n = expectation_matrix(engine, functional, &psi, &active)?;
        let (n_inv, condition) = checked_inverse(n)?;
        Ok(Self {
            functional: functional.clone(),
            pilot: pilot.clone(),
            psi,
            delta: tuning.delta,
            active,
            n_inv,
            condition,
        })
    }

    pub fn wbar(&self) -> f64 {
        self.psi.wbar
    }

    /// `IF(z0) = −blockdiag(N⁻¹, 0) (Ψ(z0, T) + q′ − diag(Φ, 0) IF_pilot(z0))`.
    pub fn evaluate(&self, y0: f64, x0: &[f64], pilot_if: &DVector<f64>) -> Result<DVector<f64>> {
        let f = &self.functional;
        check_point(x0, f.p())?;
        if pilot_if.len() != f.p() + 1 {
            return invalid_input(format!("pilot influence has length {}, expected {}", pilot_if.len(), f.p() + 1));
        }
        let full = score(y0, x0, f, &self.psi, self.delta);
        let k = self.active.len();
        let mut rhs = DVector::zeros(k + 1);
        rhs[0] = full[0];
        for (a, &j) in self.active.iter().enumerate() {
            let pb = self.pilot.beta_inf[j];
            let sign = f.beta_inf[j].signum();
            let q = f.lambda * sign / pb.abs();
            let phi = f.lambda * sign * pb.signum() / (pb * pb);
            rhs[a + 1] = full[j + 1] + q - phi * pilot_if[j + 1];
        }
        let sol = -(&self.n_inv * rhs);
        let mut out = DVector::zeros(f.p() + 1);
        out[0] = sol[0];
        for (a, &j) in self.active.iter().enumerate() {
            out[j + 1] = sol[a + 1];
        }
        Ok(out)
    }
}

/// Free-function form of [`AdaptiveTauLassoInfluence::evaluate`].
pub fn if_adaptive_tau_lasso(
    y0: f64,
    x0: &[f64],
    functional: &FunctionalValue,
    pilot_functional: &FunctionalValue,
    pilot_if: &DVector<f64>,
    engine: &ExpectationEngine,
    tuning: &TuningPair,
) -> Result<DVector<f64>> {
    AdaptiveTauLassoInfluence::new(functional, pilot_functional, engine, tuning)?.evaluate(y0, x0, pilot_if)
}

/// Standardized sensitivity curve `(n+1)(θ̂(Z ∪ z0) − θ̂(Z))` given `θ̂(Z)`.
pub fn sensitivity_curve_from_base<F>(data: &Dataset, y0: f64, x0: &[f64], base: &DVector<f64>, estimator: F) -> Result<DVector<f64>>
where
    F: Fn(&Dataset) -> Result<DVector<f64>>,
{
    let augmented = data.with_row(y0, x0)?;
    let theta = estimator(&augmented)?;
    if theta.len() != base.len() {
        return invalid_input("estimator returned vectors of different lengths");
    }
    Ok((theta - base) * (data.n() + 1) as f64)
}

/// Standardized sensitivity curve at `z0 = (y0, x0)`; `estimator` returns `(s, β)`.
pub fn sensitivity_curve<F>(data: &Dataset, y0: f64, x0: &[f64], estimator: F) -> Result<DVector<f64>>
where
    F: Fn(&Dataset) -> Result<DVector<f64>>,
{
    let base = estimator(data)?;
    sensitivity_curve_from_base(data, y0, x0, &base, estimator)
}

/// Stacks scale and coefficients as `(s, β_1..β_p)`.
pub fn theta(fit: &FitResult) -> DVector<f64> {
    let p = fit.beta.len();
    DVector::from_fn(p + 1, |i, _| if i == 0 { fit.s } else { fit.beta[i - 1] })
}

/// IF and SC evaluated over a grid of contamination points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    /// Points `(y0, x0)`.
    pub grid: Vec<(f64, Vec<f64>)>,
    pub if_values: Vec<Vec<f64>>,
    pub sc_values: Vec<Vec<f64>>,
    pub max_abs_deviation: f64,
    /// Per component: `sqrt(Σ (IF − SC)²) / sqrt(Σ IF²)` over the grid.
    pub normalized_rms_deviation: Vec<f64>,
}

impl InfluenceReport {
    pub fn new(grid: Vec<(f64, Vec<f64>)>, if_values: Vec<Vec<f64>>, sc_values: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() != if_values.len() || grid.len() != sc_values.len() || grid.is_empty() {
            return invalid_input("grid, IF and SC must be non-empty and of equal length");
        }
        let m = if_values[0].len();
        let mut max_abs_deviation = 0.0_f64;
        let mut num = vec![0.0; m];
        let mut den = vec![0.0; m];
        for (a, b) in if_values.iter().zip(&sc_values) {
            if a.len() != m || b.len() != m {
                return invalid_input("IF and SC vectors differ in length");
            }
            for c in 0..m {
                let d = a[c] - b[c];
                max_abs_deviation = max_abs_deviation.max(d.abs());
                num[c] += d * d;
                den[c] += a[c] * a[c];
            }
        }
        let normalized_rms_deviation = num
            .iter()
            .zip(&den)
            .map(|(n, d)| if *d > 0.0 { (n / d).sqrt() } else if *n > 0.0 { f64::INFINITY } else { 0.0 })
            .collect();
        Ok(Self { grid, if_values, sc_values, max_abs_deviation, normalized_rms_deviation })
    }

    /// Largest normalized RMS deviation over components.
    pub fn worst_normalized_deviation(&self) -> f64 {
        self.normalized_rms_deviation.iter().copied().fold(0.0, f64::max)
    }

    /// Largest absolute IF or SC entry; infinite when anything is non-finite.
    pub fn sup_norm(&self) -> f64 {
        self.if_values
            .iter()
            .chain(&self.sc_values)
            .flatten()
            .map(|v| if v.is_finite() { v.abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

/// Normal-model efficiency of the unpenalized tau-estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalEfficiency {
    /// Population M-scale of standard normal errors.
    pub s: f64,
    /// Population `W̄`.
    pub wbar: f64,
    /// `s² E[ψ²(u/s)] / (E[ψ'(u/s)])²`, the variance relative to least squares.
    pub variance_ratio: f64,
    pub efficiency: f64,
}

/// Evaluates the asymptotic covariance factor at standard normal errors by
/// Gauss–Hermite quadrature.
pub fn normal_efficiency(tuning: &TuningPair) -> Result<NormalEfficiency> {
    tuning.validate()?;
    let q = NormalQuadrature::standard();
    let (rho0, rho1) = (tuning.rho0(), tuning.rho1());
    // population M-scale: E[ρ0(Z/s)] = δ, decreasing in s
    let (mut lo, mut hi) = (1e-3_f64, 1e3_f64);
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if q.expect(|z| rho0.rho(z / mid)) > tuning.delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let wbar = q.expect(|z| rho1.two_rho_minus_psi_t(z / s)) / q.expect(|z| rho0.psi_times_t(z / s));
    let psi = CombinedPsi { rho0, rho1, wbar };
    let e_psi2 = q.expect(|z| psi.psi(z / s).powi(2));
    let e_dpsi = q.expect(|z| psi.psi_prime(z / s));
    let variance_ratio = s * s * e_psi2 / (e_dpsi * e_dpsi);
    Ok(NormalEfficiency { s, wbar, variance_ratio, efficiency: 1.0 / variance_ratio })
}
