use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Codevector, OdaState};
use crate::divergence::{check_dims, scale_factor, DivergenceKind};
use crate::error::{OdaError, Result};

/// Outcome of comparing two consecutive location snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceStatus {
    NotConverged,
    Converged,
    /// The level ran out of iterations before the codebook settled.
    IterationCap,
}

impl ConvergenceStatus {
    pub fn is_done(self) -> bool {
        !matches!(self, ConvergenceStatus::NotConverged)
    }
}

/// Gibbs weights `ρᵢ·exp(−f·dᵢ)` normalised to sum one, evaluated in log
/// space.
///
/// `distances[i]` is `d_φ(x, μᵢ)` and `factor` is `(1 − λ)/λ`.
pub fn gibbs_weights(priors: &[f64], distances: &[f64], factor: f64, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    out.extend(priors.iter().zip(distances).map(|(&rho, &d)| logit(rho, d, factor)));
    normalize_logits(out)
}

#[inline]
fn logit(prior: f64, distance: f64, factor: f64) -> f64 {
    if prior > 0.0 {
        prior.ln() - factor * distance
    } else {
        f64::NEG_INFINITY
    }
}

fn normalize_logits(out: &mut [f64]) -> Result<()> {
    let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(OdaError::CorruptState(
            "every codevector has zero prior; memberships are undefined".into(),
        ));
    }
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
    Ok(())
}

/// Stochastic approximation update of one codevector.
pub fn sa_step(cv: &mut Codevector, x: &[f64], membership: f64, alpha: f64) -> Result<()> {
    debug_assert!((0.0..=1.0).contains(&membership));
    debug_assert!((0.0..=1.0).contains(&alpha));
    let prior = cv.prior + alpha * (membership - cv.prior);
    if !(prior > 0.0) {
        return Err(OdaError::CorruptState(format!(
            "prior dropped to {prior} (membership {membership}, stepsize {alpha})"
        )));
    }
    cv.prior = prior;
    for ((s, loc), &xi) in cv.weighted_sum.iter_mut().zip(cv.location.iter_mut()).zip(x) {
        *s += alpha * (xi * membership - *s);
        *loc = *s / prior;
    }
    Ok(())
}

fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return u.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Largest critical temperature coefficient of a batch.
///
/// Returns `λ* = T*/(1 + T*)` with `T* = κ·ν̄`, where `ν̄` is the largest
/// eigenvalue of the batch covariance and `κ` the largest curvature of `φ` at
/// the batch mean. A single codevector placed at the mean splits once `λ`
/// drops below `λ*`. A batch without spread never splits and yields 0.
pub fn critical_lambda(kind: DivergenceKind, samples: &[Vec<f64>]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(OdaError::config("critical_lambda needs at least two samples"));
    }
    let dim = samples[0].len();
    if dim == 0 {
        return Err(OdaError::config("samples must have at least one coordinate"));
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in samples {
        check_dims(s, &mean)?;
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / n;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for s in samples {
        for i in 0..dim {
            let di = s[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (s[j] - mean[j]) / n;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let top = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(top > 1e-12) {
        return Ok(0.0);
    }
    let curvature = kind
        .phi_second_derivative(&mean)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let t = curvature * top;
    Ok(t / (1.0 + t))
}

impl OdaState {
    pub(super) fn memberships_into(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        let factor = scale_factor(self.lambda)?;
        out.clear();
        out.extend(
            self.codevectors
                .iter()
                .map(|cv| logit(cv.prior, self.divergence.eval_unchecked(x, &cv.location), factor)),
        );
        normalize_logits(out)
    }

    /// Association probabilities `p(μᵢ|x)` of every codevector.
    pub fn gibbs_memberships(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_query(x)?;
        let mut out = Vec::with_capacity(self.codevectors.len());
        self.memberships_into(x, &mut out)?;
        Ok(out)
    }

    pub(crate) fn check_query(&self, x: &[f64]) -> Result<()> {
        let dim = self
            .dim()
            .ok_or_else(|| OdaError::CorruptState("codebook is empty".into()))?;
        if x.len() != dim {
            return Err(OdaError::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        self.divergence.check_domain(x)
    }

    pub(crate) fn nearest_unchecked(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, cv) in self.codevectors.iter().enumerate() {
            let d = self.divergence.eval_unchecked(x, &cv.location);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub(crate) fn nearest_with_label(&self, x: &[f64], label: super::Label) -> Option<usize> {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (i, cv) in self.codevectors.iter().enumerate() {
            if cv.label != Some(label) {
                continue;
            }
            let d = self.divergence.eval_unchecked(x, &cv.location);
            if d < best_d || best.is_none() {
                best_d = d;
                best = Some(i);
            }
        }
        best
    }

    /// Index of the Voronoi cell containing `x`; ties go to the lowest index.
    pub fn predict_region(&self, x: &[f64]) -> Result<usize> {
        self.check_query(x)?;
        Ok(self.nearest_unchecked(x))
    }

    /// Compares `prev_locations` with the current codebook.
    pub fn converged_at_level(&self, prev_locations: &[Vec<f64>]) -> ConvergenceStatus {
        let settled = prev_locations.len() == self.codevectors.len()
            && scale_factor(self.lambda).is_ok_and(|factor| {
                self.codevectors.iter().zip(prev_locations).all(|(cv, prev)| {
                    factor * self.divergence.eval_unchecked(&cv.location, prev) < self.config.eps_converge
                })
            });
        if settled {
            ConvergenceStatus::Converged
        } else if self.step_index >= self.config.max_iters_per_level {
            ConvergenceStatus::IterationCap
        } else {
            ConvergenceStatus::NotConverged
        }
    }

    /// Replaces every codevector by the pair `μ ± δ∘u` for a random unit
    /// direction `u`. Each child inherits half of the prior.
    pub fn perturb_codebook<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        if self.codevectors.len() > self.config.k_max {
            return Err(OdaError::CorruptState(format!(
                "cannot perturb {} codevectors with k_max = {}",
                self.codevectors.len(),
                self.config.k_max
            )));
        }
        let dim = self.dim().ok_or_else(|| OdaError::CorruptState("codebook is empty".into()))?;
        let delta = self.delta.clone().unwrap_or_else(|| vec![1e-2; dim]);
        let mut next = Vec::with_capacity(2 * self.codevectors.len());
        for cv in &self.codevectors {
            let u = random_direction(dim, rng);
            let mut scale = 1.0;
            let mut attempt = 0;
            let (plus, minus) = loop {
                let plus: Vec<f64> = cv
                    .location
                    .iter()
                    .zip(&u)
                    .zip(&delta)
                    .map(|((m, u), d)| m + scale * d * u)
                    .collect();
                let minus: Vec<f64> = cv
                    .location
                    .iter()
                    .zip(&u)
                    .zip(&delta)
                    .map(|((m, u), d)| m - scale * d * u)
                    .collect();
                match (self.divergence.check_domain(&plus), self.divergence.check_domain(&minus)) {
                    (Ok(()), Ok(())) => break (plus, minus),
                    (Err(e), _) | (_, Err(e)) => {
                        attempt += 1;
                        if attempt > 10 {
                            return Err(e);
                        }
                        scale *= 0.5;
                    }
                }
            };
            let prior = cv.prior / 2.0;
            for location in [plus, minus] {
                let mut child = Codevector::new(location, prior);
                child.label = cv.label;
                child.model = cv.model.clone();
                if let Some(m) = child.model.as_mut() {
                    m.reset_for_prior(prior);
                }
                next.push(child);
            }
        }
        self.codevectors = next;
        self.hits = vec![0; self.codevectors.len()];
        Ok(())
    }

    /// Greedy pass in index order: a codevector is absorbed by the first
    /// earlier survivor that carries the same label and lies within scaled
    /// divergence `eps_merge`.
    pub fn merge_effective(&mut self) -> Result<()> {
        let factor = scale_factor(self.lambda)?;
        let old = std::mem::take(&mut self.codevectors);
        let old_hits = std::mem::take(&mut self.hits);
        let mut kept: Vec<Codevector> = Vec::with_capacity(old.len());
        let mut hits: Vec<u64> = Vec::with_capacity(old.len());
        for (i, cv) in old.into_iter().enumerate() {
            let h = old_hits.get(i).copied().unwrap_or(0);
            let target = kept.iter().position(|k| {
                k.label == cv.label && factor * self.divergence.eval_unchecked(&k.location, &cv.location) < self.config.eps_merge
            });
            match target {
                Some(j) => {
                    let k = &mut kept[j];
                    let own_prior = k.prior;
                    k.prior += cv.prior;
                    for ((s, loc), add) in k.weighted_sum.iter_mut().zip(k.location.iter_mut()).zip(&cv.weighted_sum) {
                        *s += add;
                        *loc = *s / k.prior;
                    }
                    if let (Some(m), Some(other)) = (k.model.as_mut(), cv.model.as_ref()) {
                        m.absorb(other, own_prior, cv.prior);
                    }
                    hits[j] += h;
                }
                None => {
                    kept.push(cv);
                    hits.push(h);
                }
            }
        }
        self.codevectors = kept;
        self.hits = hits;
        Ok(())
    }

    /// Drops codevectors whose prior is below `eps_idle` and renormalises the
    /// survivors. The last codevector overall and the last of each label are
    /// always kept.
    pub fn remove_idle(&mut self) {
        let eps = self.config.eps_idle;
        let mut keep = vec![true; self.codevectors.len()];
        for i in 0..self.codevectors.len() {
            if self.codevectors[i].prior >= eps {
                continue;
            }
            let label = self.codevectors[i].label;
            let others_alive = (0..keep.len()).any(|j| j != i && keep[j]);
            let label_alive = self
                .codevectors
                .iter()
                .enumerate()
                .any(|(j, cv)| j != i && keep[j] && cv.label == label);
            if others_alive && label_alive {
                keep[i] = false;
            }
        }
        if keep.iter().any(|k| !k) {
            let mut flags = keep.iter();
            self.codevectors.retain(|_| *flags.next().unwrap());
            let mut flags = keep.iter();
            self.hits.retain(|_| flags.next().copied().unwrap_or(true));
        }
        let total = self.prior_sum();
        if total > 0.0 {
            let factor = 1.0 / total;
            for cv in &mut self.codevectors {
                cv.rescale(factor);
            }
        }
    }

    /// Mean divergence between each sample and its nearest codevector.
    pub fn average_distortion(&self, batch: &[Vec<f64>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(OdaError::config("average_distortion needs a non-empty batch"));
        }
        let mut total = 0.0;
        for x in batch {
            let i = self.predict_region(x)?;
            total += self.divergence.eval_unchecked(x, &self.codevectors[i].location);
        }
        Ok(total / batch.len() as f64)
    }
}
