//! Bregman divergences.
//!
//! A Bregman divergence is generated by a strictly convex, differentiable
//! function `φ`:
//!
//! ```text
//! d_φ(x, μ) = φ(x) − φ(μ) − ⟨∇φ(μ), x − μ⟩
//! ```
//!
//! Only two members of the family are provided. They are selected through a
//! closed enumeration so that every divergence used for training also carries
//! the curvature data (`∂²φ/∂μ²`) needed to predict bifurcations.

use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};

/// Coordinates at or below this value are rejected by the generalized KL
/// divergence.
pub const KL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceKind {
    /// `φ(x) = ⟨x, x⟩`, giving `‖x − μ‖²`. Defined on all of ℝᵈ.
    #[default]
    SquaredEuclidean,
    /// `φ(x) = ⟨x, log x⟩`, giving `⟨x, log x − log μ⟩ − ⟨1, x − μ⟩`.
    /// Defined on strictly positive vectors only.
    GeneralizedKl,
}

impl DivergenceKind {
    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::SquaredEuclidean => "squared-euclidean",
            DivergenceKind::GeneralizedKl => "generalized-kl",
        }
    }

    /// Checks that `v` lies in the domain of `φ`.
    pub fn check_domain(self, v: &[f64]) -> Result<()> {
        for (index, &value) in v.iter().enumerate() {
            let ok = match self {
                DivergenceKind::SquaredEuclidean => value.is_finite(),
                DivergenceKind::GeneralizedKl => value.is_finite() && value > KL_FLOOR,
            };
            if !ok {
                return Err(OdaError::DomainViolation { index, value });
            }
        }
        Ok(())
    }

    /// Evaluates `d_φ(x, μ)`.
    pub fn eval(self, x: &[f64], mu: &[f64]) -> Result<f64> {
        check_dims(x, mu)?;
        self.check_domain(x)?;
        self.check_domain(mu)?;
        Ok(self.eval_unchecked(x, mu))
    }

    /// Evaluates `d_φ(x, μ)` without dimension or domain checks.
    ///
    /// Used on the hot training path where both arguments were validated when
    /// they entered the learner.
    #[inline]
    pub fn eval_unchecked(self, x: &[f64], mu: &[f64]) -> f64 {
        match self {
            DivergenceKind::SquaredEuclidean => x
                .iter()
                .zip(mu)
                .map(|(a, b)| {
                    let diff = a - b;
                    diff * diff
                })
                .sum(),
            DivergenceKind::GeneralizedKl => x
                .iter()
                .zip(mu)
                .map(|(&a, &b)| a * (a.ln() - b.ln()) - (a - b))
                .sum::<f64>()
                // rounding can push an exact zero slightly negative
                .max(0.0),
        }
    }

    /// Diagonal of `∂²φ/∂μ²` at `mu`.
    pub fn phi_second_derivative(self, mu: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(mu)?;
        Ok(match self {
            DivergenceKind::SquaredEuclidean => vec![2.0; mu.len()],
            DivergenceKind::GeneralizedKl => mu.iter().map(|m| 1.0 / m).collect(),
        })
    }

    /// `((1 − λ)/λ) · d_φ(x, μ)`, the dissimilarity seen by the learner at
    /// temperature `λ/(1 − λ)`.
    pub fn scaled(self, x: &[f64], mu: &[f64], lambda: f64) -> Result<f64> {
        let factor = scale_factor(lambda)?;
        Ok(factor * self.eval(x, mu)?)
    }
}

impl std::fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DivergenceKind {
    type Err = OdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared-euclidean" | "euclidean" => Ok(DivergenceKind::SquaredEuclidean),
            "generalized-kl" | "kl" => Ok(DivergenceKind::GeneralizedKl),
            other => Err(OdaError::config(format!("unknown divergence `{other}`"))),
        }
    }
}

/// `(1 − λ)/λ` for `λ ∈ (0, 1)`.
pub fn scale_factor(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(OdaError::config(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    Ok((1.0 - lambda) / lambda)
}

/// Temperature `T = λ/(1 − λ)`.
pub fn temperature(lambda: f64) -> f64 {
    lambda / (1.0 - lambda)
}

pub fn bregman_eval(kind: DivergenceKind, x: &[f64], mu: &[f64]) -> Result<f64> {
    kind.eval(x, mu)
}

pub fn phi_second_derivative(kind: DivergenceKind, mu: &[f64]) -> Result<Vec<f64>> {
    kind.phi_second_derivative(mu)
}

pub fn scaled_dissimilarity(kind: DivergenceKind, x: &[f64], mu: &[f64], lambda: f64) -> Result<f64> {
    kind.scaled(x, mu, lambda)
}

pub(crate) fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(OdaError::DimensionMismatch {
            expected: b.len(),
            found: a.len(),
        });
    }
    Ok(())
}
