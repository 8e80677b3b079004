//! Generative descriptions of the simulation designs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use taulasso::Dataset;

use crate::error::{BenchError, Result};

/// Law of the additive errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorLaw {
    #[serde(rename = "normal")]
    Normal,
    /// Student's t with three degrees of freedom.
    #[serde(rename = "t3")]
    StudentT3,
    /// Student's t with one degree of freedom.
    #[serde(rename = "t1")]
    Cauchy,
}

impl ErrorLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorLaw::Normal => "normal",
            ErrorLaw::StudentT3 => "t3",
            ErrorLaw::Cauchy => "t1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(ErrorLaw::Normal),
            "t3" => Ok(ErrorLaw::StudentT3),
            "t1" | "cauchy" => Ok(ErrorLaw::Cauchy),
            _ => Err(BenchError::InvalidSpec(format!("unknown error law '{s}' (expected normal, t3 or t1)"))),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorLaw::Normal => StandardNormal.sample(rng),
            ErrorLaw::StudentT3 => StudentT::new(3.0).expect("valid dof").sample(rng),
            ErrorLaw::Cauchy => StudentT::new(1.0).expect("valid dof").sample(rng),
        }
    }
}

/// Consecutive predictors with correlation `rho^{|i−j|}`; different blocks are
/// independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBlock {
    pub size: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub beta0: Vec<f64>,
    pub blocks: Vec<CorrelationBlock>,
    /// Signal-to-noise ratio in dB for normal errors; unit error variance when absent.
    pub snr_db: Option<f64>,
    pub error_law: ErrorLaw,
}

/// Names accepted by [`ScenarioSpec::named`].
pub const SCENARIO_NAMES: [&str; 5] = ["scenario1", "scenario2", "scenario3", "scenario4", "scenario5"];

fn graded(parts: &[(f64, usize)], p: usize) -> Vec<f64> {
    let mut beta: Vec<f64> = parts.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect();
    beta.resize(p, 0.0);
    beta
}

impl ScenarioSpec {
    pub fn p(&self) -> usize {
        self.beta0.len()
    }

    pub fn k0(&self) -> usize {
        self.beta0.iter().filter(|b| **b != 0.0).count()
    }

    /// The five standard designs.
    pub fn named(name: &str, error_law: ErrorLaw) -> Result<Self> {
        let one = |p: usize, rho: f64| vec![CorrelationBlock { size: p, rho }];
        let (n, beta0, blocks, snr) = match name {
            "scenario1" => (50, vec![4.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0], one(10, 0.5), 5.0),
            "scenario2" => (40, graded(&[(2.0, 8)], 500), one(500, 0.5), 15.0),
            "scenario3" => (100, graded(&[(2.5, 5), (1.5, 5), (0.5, 5)], 30), one(30, 0.95), 25.0),
            "scenario4" => (
                100,
                graded(&[(2.5, 5), (1.5, 5), (0.5, 5)], 200),
                vec![CorrelationBlock { size: 15, rho: 0.95 }, CorrelationBlock { size: 185, rho: 0.95 }],
                25.0,
            ),
            "scenario5" => (
                100,
                graded(&[(2.5, 5), (0.0, 1), (1.5, 2)], 200),
                vec![CorrelationBlock { size: 15, rho: 0.95 }, CorrelationBlock { size: 185, rho: 0.95 }],
                25.0,
            ),
            _ => {
                return Err(BenchError::InvalidSpec(format!(
                    "unknown scenario '{name}' (expected one of {})",
                    SCENARIO_NAMES.join(", ")
                )))
            }
        };
        Ok(Self { name: name.to_string(), n, beta0, blocks, snr_db: Some(snr), error_law })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(BenchError::InvalidSpec(format!("n must be at least 2, got {}", self.n)));
        }
        if self.beta0.is_empty() || self.beta0.iter().any(|b| !b.is_finite()) {
            return Err(BenchError::InvalidSpec("beta0 must be non-empty and finite".into()));
        }
        let total: usize = self.blocks.iter().map(|b| b.size).sum();
        if total != self.p() {
            return Err(BenchError::InvalidSpec(format!("correlation blocks cover {total} predictors, beta0 has {}", self.p())));
        }
        for b in &self.blocks {
            if b.size == 0 || !(b.rho.abs() < 1.0) {
                return Err(BenchError::InvalidSpec(format!(
                    "block of size {} with rho {} is not positive definite",
                    b.size, b.rho
                )));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(BenchError::InvalidSpec("snr_db must be finite".into()));
            }
        }
        Ok(())
    }

    /// Rows of `X` from `N(0, Σ)` via the AR(1) recursion inside each block.
    pub fn draw_design<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(n, self.p());
        for i in 0..n {
            let mut j0 = 0;
            for b in &self.blocks {
                let innov = (1.0 - b.rho * b.rho).sqrt();
                let mut prev: f64 = StandardNormal.sample(rng);
                x[(i, j0)] = prev;
                for j in 1..b.size {
                    let z: f64 = StandardNormal.sample(rng);
                    prev = b.rho * prev + innov * z;
                    x[(i, j0 + j)] = prev;
                }
                j0 += b.size;
            }
        }
        x
    }

    /// Error standard deviation implied by the SNR for a design `x`.
    pub fn noise_sd(&self, x: &DMatrix<f64>) -> f64 {
        match (self.error_law, self.snr_db) {
            (ErrorLaw::Normal, Some(snr)) => {
                let signal = x * DVector::from_column_slice(&self.beta0);
                (signal.norm_squared() * 10f64.powf(-snr / 10.0) / x.nrows() as f64).sqrt()
            }
            _ => 1.0,
        }
    }

    fn draw_response<R: Rng + ?Sized>(&self, x: &DMatrix<f64>, sd: f64, rng: &mut R) -> DVector<f64> {
        let mut y = x * DVector::from_column_slice(&self.beta0);
        for v in y.iter_mut() {
            *v += sd * self.error_law.sample(rng);
        }
        y
    }
}

/// Independent training and test samples of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub train: Dataset,
    pub test: Dataset,
    /// Error standard deviation used for both samples.
    pub noise_sd: f64,
}

/// Draws a clean sample; the noise level follows the training design.
pub fn generate<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    let x_train = spec.draw_design(spec.n, rng);
    let sd = spec.noise_sd(&x_train);
    let y_train = spec.draw_response(&x_train, sd, rng);
    let x_test = spec.draw_design(spec.n, rng);
    let y_test = spec.draw_response(&x_test, sd, rng);
    Ok(Sample {
        train: Dataset::new(y_train, x_train)?,
        test: Dataset::new(y_test, x_test)?,
        noise_sd: sd,
    })
}
