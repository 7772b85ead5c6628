use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};

/// How large the perturbation applied to each codevector at the start of a
/// temperature level is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    /// The same magnitude on every coordinate.
    Absolute { delta: f64 },
    /// `factor` times the per-coordinate standard deviation of the first
    /// `warmup` observations. Training starts once the warmup buffer is full.
    Relative { factor: f64, warmup: usize },
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation::Relative {
            factor: 0.01,
            warmup: 100,
        }
    }
}

/// Temperature schedule, tolerances and stepsizes of the annealing loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealingConfig {
    pub lambda_start: f64,
    /// Geometric decay factor: `λ ← γλ` after every level.
    pub gamma: f64,
    pub lambda_min: f64,
    /// Convergence tolerance on scaled codevector movement.
    pub eps_converge: f64,
    /// Codevectors closer than this (scaled) are merged.
    pub eps_merge: f64,
    /// Codevectors whose prior falls below this are discarded.
    pub eps_idle: f64,
    pub perturbation: Perturbation,
    /// Stepsizes follow `α_n = 1/(a + b·n)`.
    pub stepsize_a: f64,
    pub stepsize_b: f64,
    pub k_max: usize,
    pub max_iters_per_level: u64,
    /// Observations between two location snapshots compared by the
    /// convergence test.
    pub convergence_window: u64,
}

impl Default for AnnealingConfig {
    fn default() -> Self {
        AnnealingConfig {
            lambda_start: 0.99,
            gamma: 0.9,
            lambda_min: 0.01,
            eps_converge: 1e-4,
            eps_merge: 1e-2,
            eps_idle: 1e-4,
            perturbation: Perturbation::default(),
            stepsize_a: 1.0,
            stepsize_b: 0.5,
            k_max: 128,
            max_iters_per_level: 20_000,
            convergence_window: 200,
        }
    }
}

impl AnnealingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(OdaError::config(msg));
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_start && self.lambda_start < 1.0) {
            return fail(format!(
                "need 0 < lambda_min < lambda_start < 1, got lambda_min={} lambda_start={}",
                self.lambda_min, self.lambda_start
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        for (name, v) in [
            ("eps_converge", self.eps_converge),
            ("eps_merge", self.eps_merge),
            ("eps_idle", self.eps_idle),
            ("stepsize_a", self.stepsize_a),
            ("stepsize_b", self.stepsize_b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        match self.perturbation {
            Perturbation::Absolute { delta } if !(delta > 0.0 && delta.is_finite()) => {
                return fail(format!("perturbation delta must be positive, got {delta}"));
            }
            Perturbation::Relative { factor, warmup } if !(factor > 0.0 && factor.is_finite()) || warmup == 0 => {
                return fail(format!(
                    "relative perturbation needs factor > 0 and warmup >= 1, got {factor} and {warmup}"
                ));
            }
            _ => {}
        }
        if self.k_max == 0 {
            return fail("k_max must be at least 1".into());
        }
        if self.max_iters_per_level == 0 || self.convergence_window == 0 {
            return fail("max_iters_per_level and convergence_window must be at least 1".into());
        }
        Ok(())
    }

    /// `α_n` for the `n`-th observation of a level, counted from 1.
    #[inline]
    pub fn alpha(&self, n: u64) -> f64 {
        1.0 / (self.stepsize_a + self.stepsize_b * n as f64)
    }

    /// Number of temperature levels the schedule visits before `λ` drops
    /// below `lambda_min`.
    pub fn schedule_len(&self) -> usize {
        let mut lambda = self.lambda_start;
        let mut n = 0;
        while lambda >= self.lambda_min {
            n += 1;
            lambda *= self.gamma;
        }
        n
    }
}
