//! Histogram-style density estimates over learned partitions.
//!
//! Once the temperature is low the codebook partitions the space into
//! Voronoi cells and `p̂(x) = count(Sᵢ) / (n · Vol(Sᵢ))` for the cell `Sᵢ`
//! containing `x`. Exact cell volumes are impractical beyond two dimensions,
//! so they are estimated by Monte Carlo over the bounding box of the observed
//! data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};
use crate::oda::OdaState;

/// Default number of Monte Carlo points used for volume estimates.
pub const DEFAULT_VOLUME_SAMPLES: usize = 100_000;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Bounds {
    pub fn from_point(x: &[f64]) -> Self {
        Bounds {
            min: x.to_vec(),
            max: x.to_vec(),
        }
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Vec<f64>>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let mut b = Bounds::from_point(iter.next()?);
        for p in iter {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, x: &[f64]) {
        for ((lo, hi), &v) in self.min.iter_mut().zip(self.max.iter_mut()).zip(x) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Widens flat coordinates so the box has positive volume.
    pub fn padded(&self) -> Bounds {
        let mut b = self.clone();
        for (lo, hi) in b.min.iter_mut().zip(b.max.iter_mut()) {
            if *hi - *lo <= 0.0 {
                let pad = 1e-6_f64.max(lo.abs() * 1e-6);
                *lo -= pad;
                *hi += pad;
            }
        }
        b
    }

    pub fn volume(&self) -> f64 {
        self.min.iter().zip(&self.max).map(|(lo, hi)| hi - lo).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

/// Monte Carlo estimate of the volume of every cell inside `bounds`.
///
/// `cell_of` maps a point to its cell index, or `None` when the point falls
/// outside every cell of interest.
pub fn estimate_cell_volumes<F, R>(cells: usize, mut cell_of: F, bounds: &Bounds, samples: usize, rng: &mut R) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Option<usize>,
    R: Rng + ?Sized,
{
    let bounds = bounds.padded();
    let mut counts = vec![0u64; cells];
    for _ in 0..samples {
        let p = bounds.sample(rng);
        if let Some(c) = cell_of(&p) {
            counts[c] += 1;
        }
    }
    let unit = bounds.volume() / samples.max(1) as f64;
    counts.into_iter().map(|c| c as f64 * unit).collect()
}

/// `hits / (n_total · volume)` for one cell.
pub fn cell_density(cell: usize, hits: u64, n_total: u64, volume: f64) -> Result<f64> {
    if hits == 0 {
        return Ok(0.0);
    }
    if !(volume > 0.0) {
        return Err(OdaError::ZeroVolume { cell });
    }
    Ok(hits as f64 / (n_total as f64 * volume))
}

/// A frozen piecewise-constant density: per-cell counts and volumes behind a
/// point-to-cell map.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDensity {
    pub hits: Vec<u64>,
    pub volumes: Vec<f64>,
    pub n_total: u64,
}

impl CellDensity {
    pub fn density(&self, cell: usize) -> Result<f64> {
        cell_density(cell, self.hits[cell], self.n_total, self.volumes[cell])
    }

    /// `Σ count(Sᵢ)/(n·Vol(Sᵢ)) · Vol(Sᵢ)`, equal to the fraction of counted
    /// samples that fall in cells with non-zero estimated volume.
    pub fn total_mass(&self) -> f64 {
        self.hits
            .iter()
            .zip(&self.volumes)
            .filter(|(_, v)| **v > 0.0)
            .map(|(h, _)| *h as f64)
            .sum::<f64>()
            / self.n_total.max(1) as f64
    }
}

impl OdaState {
    /// Monte Carlo volumes of the Voronoi cells inside `bounds`
    /// (defaults to the bounding box of the observed data).
    pub fn cell_volumes<R: Rng + ?Sized>(&self, bounds: Option<&Bounds>, samples: usize, rng: &mut R) -> Result<Vec<f64>> {
        let bounds = bounds
            .or(self.bounds.as_ref())
            .ok_or_else(|| OdaError::CorruptState("no observations recorded".into()))?;
        if Some(bounds.dim()) != self.dim() {
            return Err(OdaError::DimensionMismatch {
                expected: self.dim().unwrap_or(0),
                found: bounds.dim(),
            });
        }
        Ok(estimate_cell_volumes(
            self.codevectors.len(),
            |p| Some(self.nearest_unchecked(p)),
            bounds,
            samples,
            rng,
        ))
    }

    /// Density estimate `count(Sᵢ)/(n_total·Vol(Sᵢ))` of the cell containing
    /// `x`, using the hit counts held by the learner.
    pub fn density_at(&self, x: &[f64], n_total: u64, volumes: &[f64]) -> Result<f64> {
        let cell = self.predict_region(x)?;
        if volumes.len() != self.codevectors.len() {
            return Err(OdaError::DimensionMismatch {
                expected: self.codevectors.len(),
                found: volumes.len(),
            });
        }
        cell_density(cell, self.hits[cell], n_total, volumes[cell])
    }
}
