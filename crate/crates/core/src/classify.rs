//! Classification on top of the annealing learner.
//!
//! Two routes are provided:
//!
//! * **class-conditional densities**: every codevector carries a label and
//!   only moves towards samples of its own class (the update is gated by
//!   `sᵢ = 𝟙[cᵢ = c]`). Each class ends up with its own partition, whose
//!   cell counts estimate `p(x | c)`, and prediction applies the Bayes rule
//!   `argmaxⱼ π̂ⱼ p̂(x | c = j)`. The label of the most probable codevector is
//!   a cheaper nearest-prototype alternative.
//! * **majority vote**: labels are regressed as values in `[0, 1]` with
//!   constant local models and each cell is labelled by rounding.

use std::collections::BTreeMap;

use rand::Rng;

use crate::density::Bounds;
use crate::error::{OdaError, Result};
use crate::local_models::LocalModel;
use crate::oda::{sa_step, AnnealingConfig, Codevector, Label, OdaState, Sample, Target, Task};
use crate::DivergenceKind;

/// Empirical class frequencies `π̂ⱼ`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassPriors {
    pub counts: BTreeMap<Label, u64>,
    pub total: u64,
}

impl ClassPriors {
    pub fn from_counts(counts: BTreeMap<Label, u64>) -> Self {
        let total = counts.values().sum();
        ClassPriors { counts, total }
    }

    pub fn observe(&mut self, label: Label) {
        *self.counts.entry(label).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn prior(&self, label: Label) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(&label).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.counts.keys().copied()
    }
}

/// Label with the largest `π̂ⱼ · p̂(x | c = j)`; ties go to the lowest label.
pub fn bayes_argmax(priors: &ClassPriors, conditional: &[(Label, f64)]) -> Option<Label> {
    let mut sorted: Vec<(Label, f64)> = conditional.to_vec();
    sorted.sort_by_key(|(l, _)| *l);
    let mut best: Option<(Label, f64)> = None;
    for (label, density) in sorted {
        let score = priors.prior(label) * density;
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((label, score));
        }
    }
    best.map(|(l, _)| l)
}

/// Per-class Voronoi cells with their volumes, backing the Bayes rule.
#[derive(Debug, Clone)]
pub struct ClassDensity {
    /// Codevector indices of each label.
    members: BTreeMap<Label, Vec<usize>>,
    /// Volume of each codevector's cell within its own class partition.
    volumes: Vec<f64>,
    /// Smallest volume the Monte Carlo estimate can resolve.
    volume_floor: f64,
}

impl ClassDensity {
    /// Estimates per-class cell volumes by Monte Carlo inside `bounds`
    /// (defaults to the observed bounding box).
    pub fn estimate<R: Rng + ?Sized>(state: &OdaState, bounds: Option<&Bounds>, samples: usize, rng: &mut R) -> Result<Self> {
        let bounds = bounds
            .or(state.bounds.as_ref())
            .ok_or_else(|| OdaError::CorruptState("no observations recorded".into()))?
            .padded();
        let mut members: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, cv) in state.codevectors.iter().enumerate() {
            if let Some(l) = cv.label {
                members.entry(l).or_default().push(i);
            }
        }
        if members.is_empty() {
            return Err(OdaError::CorruptState("no labelled codevectors".into()));
        }
        // one point set shared by every class partition
        let mut counts = vec![0u64; state.codevectors.len()];
        for _ in 0..samples {
            let p = bounds.sample(rng);
            for &label in members.keys() {
                if let Some(i) = state.nearest_with_label(&p, label) {
                    counts[i] += 1;
                }
            }
        }
        let unit = bounds.volume() / samples.max(1) as f64;
        let volumes = counts.into_iter().map(|c| c as f64 * unit).collect();
        Ok(ClassDensity {
            members,
            volumes,
            volume_floor: 0.5 * bounds.volume() / samples.max(1) as f64,
        })
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// `p̂(x | c = label)` from the learner's hit counts.
    pub fn conditional_density(&self, state: &OdaState, x: &[f64], label: Label) -> Result<f64> {
        state.check_query(x)?;
        let n_label = state.label_counts_from_hits(label);
        let Some(cell) = state.nearest_with_label(x, label) else {
            return Ok(0.0);
        };
        if n_label == 0 {
            return Ok(0.0);
        }
        let volume = self.volumes[cell].max(self.volume_floor);
        Ok(state.hits[cell] as f64 / (n_label as f64 * volume))
    }
}

impl OdaState {
    /// Samples of `label` credited to its codevectors' cells.
    fn label_counts_from_hits(&self, label: Label) -> u64 {
        self.codevectors
            .iter()
            .zip(&self.hits)
            .filter(|(cv, _)| cv.label == Some(label))
            .map(|(_, h)| *h)
            .sum()
    }

    /// Class frequencies observed so far.
    pub fn class_priors(&self) -> ClassPriors {
        ClassPriors::from_counts(self.label_counts.clone())
    }

    /// Inserts a codevector at `x` when no codevector carries `label`.
    /// Returns whether an insertion happened.
    pub fn maybe_insert_class(&mut self, x: &[f64], label: Label) -> bool {
        if self.codevectors.iter().any(|cv| cv.label == Some(label)) {
            return false;
        }
        let k = self.codevectors.len() as f64 + 1.0;
        let prior = 1.0 / k;
        let total = self.prior_sum();
        if total > 0.0 {
            let factor = (1.0 - prior) / total;
            for cv in &mut self.codevectors {
                cv.rescale(factor);
            }
        }
        self.codevectors.push(Codevector::new(x.to_vec(), prior).with_label(label));
        true
    }

    /// One gated update: memberships are computed over the whole codebook,
    /// but only codevectors carrying `label` are pulled towards `x`; the
    /// others decay towards zero prior.
    pub fn class_conditional_step(&mut self, x: &[f64], label: Label, alpha: f64) -> Result<()> {
        let memberships = self.gibbs_memberships(x)?;
        for (cv, p) in self.codevectors.iter_mut().zip(memberships) {
            let gated = if cv.label == Some(label) { p } else { 0.0 };
            sa_step(cv, x, gated, alpha)?;
        }
        Ok(())
    }

    /// Bayes rule over the per-class density estimates.
    pub fn bayes_predict(&self, density: &ClassDensity, priors: &ClassPriors, x: &[f64]) -> Result<Label> {
        let mut conditional = Vec::with_capacity(density.members.len());
        for &label in density.members.keys() {
            conditional.push((label, density.conditional_density(self, x, label)?));
        }
        bayes_argmax(priors, &conditional).ok_or_else(|| OdaError::CorruptState("no trained codevectors".into()))
    }

    /// Label of the codevector with the largest membership `p(μ|x)`.
    pub fn nn_predict(&self, x: &[f64]) -> Result<Label> {
        let memberships = self.gibbs_memberships(x)?;
        let mut best: Option<(f64, Label)> = None;
        for (p, cv) in memberships.into_iter().zip(&self.codevectors) {
            let label = cv
                .label
                .ok_or_else(|| OdaError::CorruptState("codevector without label".into()))?;
            if best.is_none_or(|(b, _)| p > b) {
                best = Some((p, label));
            }
        }
        best.map(|(_, l)| l)
            .ok_or_else(|| OdaError::CorruptState("no trained codevectors".into()))
    }

    /// Labels each cell of a learner trained with constant models on 0/1
    /// targets by rounding its model value (0.5 rounds to 1).
    pub fn majority_vote_labels(&mut self) -> Result<()> {
        for cv in &mut self.codevectors {
            let value = match &cv.model {
                Some(LocalModel::Constant { value, .. }) => *value,
                _ => return Err(OdaError::config("majority vote needs constant local models")),
            };
            cv.label = Some(if value >= 0.5 { 1 } else { 0 });
        }
        Ok(())
    }
}

/// Trains a class-conditional learner on labelled observations.
pub fn classify_fit<I, R>(stream: I, config: AnnealingConfig, divergence: DivergenceKind, rng: &mut R) -> Result<OdaState>
where
    I: IntoIterator<Item = (Vec<f64>, Label)>,
    R: rand::RngCore,
{
    let mut state = OdaState::new(config, divergence, Task::Classification, rng.next_u64())?;
    state.fit(stream.into_iter().map(|(x, l)| Sample::new(x, Target::Label(l))))?;
    Ok(state)
}
