//! Function approximation inside each cell of the partition.
//!
//! Every codevector may carry a local model `f̂ᵢ(x, θᵢ)`. Two kinds are
//! provided:
//!
//! * **constant** models, whose value is the membership-weighted mean of the
//!   outputs observed in the cell. They share the slow stepsize of the
//!   partition and are tracked as a ratio `σ_θ/ρ`, exactly like the codevector
//!   location.
//! * **affine** models `w·x + b`, trained by stochastic gradient descent on
//!   the squared error with a faster stepsize `β_n`. Only the model of the
//!   cell containing the observation is updated.

use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};
use crate::oda::{AnnealingConfig, Codevector, OdaState, Sample, Target, Task};
use crate::DivergenceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalModelKind {
    Constant,
    Affine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LocalModel {
    /// `value = weighted_output / prior` of the owning codevector.
    Constant { value: f64, weighted_output: f64 },
    Affine { weights: Vec<f64>, offset: f64 },
}

impl LocalModel {
    pub fn constant(value: f64, prior: f64) -> Self {
        LocalModel::Constant {
            value,
            weighted_output: value * prior,
        }
    }

    pub fn affine(dim: usize) -> Self {
        LocalModel::Affine {
            weights: vec![0.0; dim],
            offset: 0.0,
        }
    }

    pub fn kind(&self) -> LocalModelKind {
        match self {
            LocalModel::Constant { .. } => LocalModelKind::Constant,
            LocalModel::Affine { .. } => LocalModelKind::Affine,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            LocalModel::Constant { value, .. } => *value,
            LocalModel::Affine { weights, offset } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + offset
            }
        }
    }

    /// Rescales the running sums after the owning prior was multiplied by
    /// `factor`, so the model value is unchanged.
    pub(crate) fn rescale(&mut self, factor: f64) {
        if let LocalModel::Constant { weighted_output, .. } = self {
            *weighted_output *= factor;
        }
    }

    /// Re-derives the sums of a model copied into a child with `prior`.
    pub(crate) fn reset_for_prior(&mut self, prior: f64) {
        if let LocalModel::Constant { value, weighted_output } = self {
            *weighted_output = *value * prior;
        }
    }

    /// Folds `other` (owned by an absorbed codevector with prior
    /// `other_prior`) into `self`, owned by a codevector with prior
    /// `own_prior` before the merge. Affine models are averaged by prior.
    pub(crate) fn absorb(&mut self, other: &LocalModel, own_prior: f64, other_prior: f64) {
        let total = own_prior + other_prior;
        match (self, other) {
            (
                LocalModel::Constant { value, weighted_output },
                LocalModel::Constant {
                    weighted_output: other_sum,
                    ..
                },
            ) => {
                *weighted_output += other_sum;
                *value = *weighted_output / total;
            }
            (
                LocalModel::Affine { weights, offset },
                LocalModel::Affine {
                    weights: other_weights,
                    offset: other_offset,
                },
            ) if total > 0.0 => {
                for (w, o) in weights.iter_mut().zip(other_weights) {
                    *w = (*w * own_prior + o * other_prior) / total;
                }
                *offset = (*offset * own_prior + other_offset * other_prior) / total;
            }
            _ => {}
        }
    }
}

/// Stepsize pair of the two-timescale recursion:
/// `α_n = 1/(alpha_a + alpha_b·n)` for the partition and
/// `β_n = 1/(beta_a + beta_b·n^exponent)` for the local models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTimescaleStepsizes {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub exponent: f64,
}

impl Default for TwoTimescaleStepsizes {
    fn default() -> Self {
        TwoTimescaleStepsizes {
            alpha_a: 1.0,
            alpha_b: 0.5,
            beta_a: 1.0,
            beta_b: 0.5,
            exponent: 0.6,
        }
    }
}

impl TwoTimescaleStepsizes {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_a", self.alpha_a),
            ("alpha_b", self.alpha_b),
            ("beta_a", self.beta_a),
            ("beta_b", self.beta_b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OdaError::config(format!("{name} must be positive, got {v}")));
            }
        }
        // α_n/β_n → 0 requires the fast exponent to stay below one.
        if !(self.exponent > 0.5 && self.exponent < 1.0) {
            return Err(OdaError::config(format!(
                "fast stepsize exponent must lie in (0.5, 1), got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    pub fn alpha(&self, n: u64) -> f64 {
        1.0 / (self.alpha_a + self.alpha_b * n as f64)
    }

    pub fn beta(&self, n: u64) -> f64 {
        1.0 / (self.beta_a + self.beta_b * (n as f64).powf(self.exponent))
    }
}

/// Slow update of a constant model, applied right after the `sa_step` of the
/// same observation so that `prior` is already the updated `ρ`.
pub fn constant_model_step(cv: &mut Codevector, y: f64, membership: f64, alpha: f64) {
    let prior = cv.prior;
    if let Some(LocalModel::Constant { value, weighted_output }) = cv.model.as_mut() {
        *weighted_output += alpha * (y * membership - *weighted_output);
        if prior > 0.0 {
            *value = *weighted_output / prior;
        }
    }
}

/// One gradient step on the squared error `(w·x + b − y)²`.
pub fn sgd_model_step(model: &mut LocalModel, x: &[f64], y: f64, beta: f64) -> Result<()> {
    let LocalModel::Affine { weights, offset } = model else {
        return Err(OdaError::config("gradient steps need an affine local model"));
    };
    if weights.len() != x.len() {
        return Err(OdaError::DimensionMismatch {
            expected: weights.len(),
            found: x.len(),
        });
    }
    let residual = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + *offset - y;
    let g = 2.0 * residual;
    if !g.is_finite() {
        return Err(OdaError::NonFinite(format!(
            "gradient of the local model diverged (residual {residual})"
        )));
    }
    for (w, v) in weights.iter_mut().zip(x) {
        *w -= beta * g * v;
    }
    *offset -= beta * g;
    Ok(())
}

/// Trains a partition with per-cell affine models on paired observations.
///
/// Every observation moves all codevectors with the slow stepsize `α_n` and
/// the affine model of the winning cell with the fast stepsize `β_n`.
pub fn two_timescale_fit<I, R>(
    stream: I,
    config: AnnealingConfig,
    stepsizes: TwoTimescaleStepsizes,
    divergence: DivergenceKind,
    rng: &mut R,
) -> Result<OdaState>
where
    I: IntoIterator<Item = (Vec<f64>, f64)>,
    R: rand::RngCore,
{
    stepsizes.validate()?;
    let config = AnnealingConfig {
        stepsize_a: stepsizes.alpha_a,
        stepsize_b: stepsizes.alpha_b,
        ..config
    };
    let mut state = OdaState::new(config, divergence, Task::AffineRegression { stepsizes }, rng.next_u64())?;
    state.fit(stream.into_iter().map(|(x, y)| Sample::new(x, Target::Value(y))))?;
    Ok(state)
}

/// Trains a partition with per-cell constant models.
pub fn constant_fit<I, R>(stream: I, config: AnnealingConfig, divergence: DivergenceKind, rng: &mut R) -> Result<OdaState>
where
    I: IntoIterator<Item = (Vec<f64>, f64)>,
    R: rand::RngCore,
{
    let mut state = OdaState::new(config, divergence, Task::ConstantRegression, rng.next_u64())?;
    state.fit(stream.into_iter().map(|(x, y)| Sample::new(x, Target::Value(y))))?;
    Ok(state)
}

impl OdaState {
    /// Output of the local model of the cell containing `x`.
    pub fn predict_value(&self, x: &[f64]) -> Result<f64> {
        let region = self.predict_region(x)?;
        self.codevectors[region]
            .model
            .as_ref()
            .map(|m| m.predict(x))
            .ok_or_else(|| OdaError::config("learner carries no local models"))
    }
}
