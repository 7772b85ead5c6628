//! The flat online deterministic annealing learner.
//!
//! An [`OdaState`] owns a codebook of [`Codevector`]s and a temperature
//! coefficient `λ ∈ (0, 1)`. Every observation moves each codevector towards
//! the sample by an amount proportional to its Gibbs membership
//!
//! ```text
//! p(μᵢ|x) ∝ ρᵢ · exp(−((1 − λ)/λ) · d_φ(x, μᵢ))
//! ```
//!
//! using the stochastic approximation recursions
//!
//! ```text
//! ρᵢ ← ρᵢ + α_n (p(μᵢ|x) − ρᵢ)
//! σᵢ ← σᵢ + α_n (x·p(μᵢ|x) − σᵢ)
//! μᵢ = σᵢ / ρᵢ
//! ```
//!
//! A temperature level starts by doubling the codebook with small
//! perturbations and ends when the codevectors stop moving. Perturbed pairs
//! that did not separate are merged, idle codevectors are dropped and `λ` is
//! lowered geometrically. The codebook therefore only grows when `λ` crosses a
//! critical value of the data.

mod config;
mod ops;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::config::{AnnealingConfig, Perturbation};
pub use self::ops::{critical_lambda, gibbs_weights, sa_step, ConvergenceStatus};

use crate::density::Bounds;
use crate::divergence::{scale_factor, temperature, DivergenceKind};
use crate::error::{OdaError, Result};
use crate::local_models::{constant_model_step, sgd_model_step, LocalModel, TwoTimescaleStepsizes};

/// Class identifier. Label vocabularies map onto these through the dataset
/// header.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codevector {
    pub location: Vec<f64>,
    /// Estimate of `p(μᵢ)`.
    pub prior: f64,
    /// Estimate of `E[𝟙{X ∈ Sᵢ} X]`; `location = weighted_sum / prior`.
    pub weighted_sum: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, rename = "model_params", skip_serializing_if = "Option::is_none")]
    pub model: Option<LocalModel>,
}

impl Codevector {
    pub fn new(location: Vec<f64>, prior: f64) -> Self {
        let weighted_sum = location.iter().map(|v| v * prior).collect();
        Codevector {
            location,
            prior,
            weighted_sum,
            label: None,
            model: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    /// Multiplies the prior and every running sum by `factor`, leaving the
    /// location and model value untouched.
    pub(crate) fn rescale(&mut self, factor: f64) {
        self.prior *= factor;
        for s in &mut self.weighted_sum {
            *s *= factor;
        }
        if let Some(m) = self.model.as_mut() {
            m.rescale(factor);
        }
    }
}

/// One row of the performance curve, appended when a temperature level ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub temperature: f64,
    /// Average distortion (clustering), squared error (regression) or
    /// accuracy (classification) over the last convergence window.
    pub metric: f64,
    pub codevector_count: usize,
    pub samples_observed: u64,
    pub elapsed_seconds: f64,
}

/// What the learner fits on top of the partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    Clustering,
    ConstantRegression,
    AffineRegression { stepsizes: TwoTimescaleStepsizes },
    Classification,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Clustering => "clustering",
            Task::ConstantRegression => "constant-regression",
            Task::AffineRegression { .. } => "affine-regression",
            Task::Classification => "classification",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    None,
    Value(f64),
    Label(Label),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub target: Target,
}

impl Sample {
    pub fn new(x: Vec<f64>, target: Target) -> Self {
        Sample { x, target }
    }
}

impl From<Vec<f64>> for Sample {
    fn from(x: Vec<f64>) -> Self {
        Sample { x, target: Target::None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    LambdaMin,
    KMax,
    StreamExhausted,
}

#[derive(Debug, Clone, Default)]
pub struct StepOutcome {
    /// Set when this observation closed a temperature level.
    pub level_completed: Option<CurvePoint>,
    pub terminated: bool,
}

#[derive(Debug, Clone)]
enum Phase {
    /// No observation seen yet.
    Empty,
    /// Collecting observations to size the perturbation.
    Warmup(Vec<Sample>),
    Training,
    Terminated(StopReason),
}

#[derive(Debug, Clone, Default)]
struct LevelTracker {
    snapshot: Vec<Vec<f64>>,
    window_metric: f64,
    window_count: u64,
    last_metric: Option<f64>,
}

/// A single online deterministic annealing learner.
#[derive(Debug, Clone)]
pub struct OdaState {
    pub codevectors: Vec<Codevector>,
    pub lambda: f64,
    pub samples_seen: u64,
    /// Stepsize index `n` within the current temperature level.
    pub step_index: u64,
    pub divergence: DivergenceKind,
    pub config: AnnealingConfig,
    pub task: Task,
    pub curve_log: Vec<CurvePoint>,
    /// Observations won by each codevector during the current level (or
    /// since the last [`OdaState::recount_hits`]).
    pub hits: Vec<u64>,
    pub label_counts: BTreeMap<Label, u64>,
    /// Bounding box of every observation seen.
    pub bounds: Option<Bounds>,
    delta: Option<Vec<f64>>,
    seed: u64,
    perturbations: u64,
    /// Cooling continues without perturbing once `k_max` is reached.
    hold_size: bool,
    phase: Phase,
    level: LevelTracker,
    clock: Option<Instant>,
    elapsed_offset: f64,
    scratch: Vec<f64>,
}

impl OdaState {
    pub fn new(config: AnnealingConfig, divergence: DivergenceKind, task: Task, seed: u64) -> Result<Self> {
        config.validate()?;
        if let Task::AffineRegression { stepsizes } = &task {
            stepsizes.validate()?;
        }
        Ok(OdaState {
            codevectors: Vec::new(),
            lambda: config.lambda_start,
            samples_seen: 0,
            step_index: 0,
            divergence,
            config,
            task,
            curve_log: Vec::new(),
            hits: Vec::new(),
            label_counts: BTreeMap::new(),
            bounds: None,
            delta: None,
            seed,
            perturbations: 0,
            hold_size: false,
            phase: Phase::Empty,
            level: LevelTracker::default(),
            clock: None,
            elapsed_offset: 0.0,
            scratch: Vec::new(),
        })
    }

    /// Builds a learner around an existing codebook at temperature `lambda`.
    ///
    /// The first level starts without perturbing the codebook, which makes
    /// this the entry point for running stochastic approximation at a fixed
    /// temperature (see [`OdaState::settle`]).
    pub fn with_codebook(
        config: AnnealingConfig,
        divergence: DivergenceKind,
        task: Task,
        codevectors: Vec<Codevector>,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        scale_factor(lambda)?;
        if codevectors.is_empty() {
            return Err(OdaError::config("codebook must hold at least one codevector"));
        }
        let dim = codevectors[0].location.len();
        for cv in &codevectors {
            if cv.location.len() != dim {
                return Err(OdaError::DimensionMismatch {
                    expected: dim,
                    found: cv.location.len(),
                });
            }
            divergence.check_domain(&cv.location)?;
        }
        let mut state = OdaState::new(config, divergence, task, seed)?;
        state.lambda = lambda;
        state.hits = vec![0; codevectors.len()];
        state.codevectors = codevectors;
        if let Perturbation::Absolute { delta } = state.config.perturbation {
            state.delta = Some(vec![delta; dim]);
        }
        state.phase = Phase::Training;
        state.begin_level(false)?;
        Ok(state)
    }

    pub(crate) fn restore(
        config: AnnealingConfig,
        divergence: DivergenceKind,
        task: Task,
        lambda: f64,
        codevectors: Vec<Codevector>,
        curve_log: Vec<CurvePoint>,
        extras: RestoredExtras,
    ) -> Self {
        let n = codevectors.len();
        OdaState {
            codevectors,
            lambda,
            samples_seen: extras.samples_seen,
            step_index: 0,
            divergence,
            config,
            task,
            curve_log,
            hits: if extras.hits.len() == n { extras.hits } else { vec![0; n] },
            label_counts: extras.label_counts,
            bounds: extras.bounds,
            delta: None,
            seed: extras.seed,
            perturbations: 0,
            hold_size: false,
            phase: Phase::Terminated(extras.stop_reason.unwrap_or(StopReason::StreamExhausted)),
            level: LevelTracker::default(),
            clock: None,
            elapsed_offset: 0.0,
            scratch: Vec::new(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.codevectors.first().map(|cv| cv.location.len())
    }

    pub fn len(&self) -> usize {
        self.codevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codevectors.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self.phase, Phase::Terminated(_))
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        match self.phase {
            Phase::Terminated(r) => Some(r),
            _ => None,
        }
    }

    pub fn temperature(&self) -> f64 {
        temperature(self.lambda)
    }

    pub fn locations(&self) -> Vec<Vec<f64>> {
        self.codevectors.iter().map(|cv| cv.location.clone()).collect()
    }

    pub fn prior_sum(&self) -> f64 {
        self.codevectors.iter().map(|cv| cv.prior).sum()
    }

    fn elapsed(&self) -> f64 {
        self.elapsed_offset + self.clock.map_or(0.0, |c| c.elapsed().as_secs_f64())
    }

    /// Feeds every observation of `stream` until the schedule terminates or
    /// the stream runs out.
    pub fn fit<I, S>(&mut self, stream: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<Sample>,
    {
        let mut any = false;
        for sample in stream {
            any = true;
            if self.observe(sample.into())?.terminated {
                return Ok(());
            }
        }
        if !any && self.codevectors.is_empty() {
            return Err(OdaError::EmptyStream);
        }
        self.finish()
    }

    /// Processes one observation.
    pub fn observe(&mut self, sample: Sample) -> Result<StepOutcome> {
        if let Phase::Terminated(_) = self.phase {
            return Ok(StepOutcome {
                level_completed: None,
                terminated: true,
            });
        }
        self.validate_sample(&sample)?;
        if self.clock.is_none() {
            self.clock = Some(Instant::now());
        }
        self.record_arrival(&sample);

        match &mut self.phase {
            Phase::Empty => {
                self.initialize(&sample);
                match self.config.perturbation {
                    Perturbation::Relative { warmup, .. } if warmup > 1 => {
                        self.phase = Phase::Warmup(vec![sample]);
                        Ok(StepOutcome::default())
                    }
                    _ => {
                        self.set_delta(std::slice::from_ref(&sample));
                        self.phase = Phase::Training;
                        self.begin_level(true)?;
                        Ok(StepOutcome::default())
                    }
                }
            }
            Phase::Warmup(buffer) => {
                buffer.push(sample);
                let full = match self.config.perturbation {
                    Perturbation::Relative { warmup, .. } => buffer.len() >= warmup,
                    Perturbation::Absolute { .. } => true,
                };
                if full {
                    self.end_warmup()
                } else {
                    Ok(StepOutcome::default())
                }
            }
            Phase::Training => self.train(&sample),
            Phase::Terminated(_) => unreachable!(),
        }
    }

    /// Closes the run after the stream is exhausted: flushes a pending warmup
    /// buffer and tidies an unfinished level (merge and idle removal, no curve
    /// point).
    pub fn finish(&mut self) -> Result<()> {
        match self.phase {
            Phase::Warmup(_) => {
                self.end_warmup()?;
                if !self.is_terminated() {
                    self.finish()?;
                }
            }
            Phase::Training => {
                self.merge_effective()?;
                self.remove_idle();
                self.phase = Phase::Terminated(StopReason::StreamExhausted);
            }
            Phase::Empty => return Err(OdaError::EmptyStream),
            Phase::Terminated(_) => {}
        }
        Ok(())
    }

    fn validate_sample(&self, sample: &Sample) -> Result<()> {
        if let Some(dim) = self.dim() {
            if sample.x.len() != dim {
                return Err(OdaError::DimensionMismatch {
                    expected: dim,
                    found: sample.x.len(),
                });
            }
        } else if sample.x.is_empty() {
            return Err(OdaError::config("observations must have at least one coordinate"));
        }
        self.divergence.check_domain(&sample.x)?;
        let ok = match (&self.task, sample.target) {
            (Task::Clustering, _) => true,
            (Task::ConstantRegression | Task::AffineRegression { .. }, Target::Value(y)) => y.is_finite(),
            (Task::Classification, Target::Label(_)) => true,
            _ => false,
        };
        if !ok {
            return Err(OdaError::config(format!(
                "observation target {:?} does not fit a {} learner",
                sample.target,
                self.task.name()
            )));
        }
        Ok(())
    }

    fn record_arrival(&mut self, sample: &Sample) {
        self.samples_seen += 1;
        match &mut self.bounds {
            Some(b) => b.include(&sample.x),
            None => self.bounds = Some(Bounds::from_point(&sample.x)),
        }
        if let Target::Label(l) = sample.target {
            *self.label_counts.entry(l).or_insert(0) += 1;
        }
    }

    fn initialize(&mut self, sample: &Sample) {
        let mut cv = Codevector::new(sample.x.clone(), 1.0);
        match (&self.task, sample.target) {
            (Task::ConstantRegression, Target::Value(y)) => cv.model = Some(LocalModel::constant(y, 1.0)),
            (Task::AffineRegression { .. }, Target::Value(y)) => {
                let mut m = LocalModel::affine(sample.x.len());
                if let LocalModel::Affine { offset, .. } = &mut m {
                    *offset = y;
                }
                cv.model = Some(m);
            }
            (Task::Classification, Target::Label(l)) => cv.label = Some(l),
            _ => {}
        }
        self.codevectors = vec![cv];
        self.hits = vec![0];
    }

    fn set_delta(&mut self, samples: &[Sample]) {
        let dim = samples[0].x.len();
        let delta = match self.config.perturbation {
            Perturbation::Absolute { delta } => vec![delta; dim],
            Perturbation::Relative { factor, .. } => {
                let n = samples.len() as f64;
                (0..dim)
                    .map(|j| {
                        let mean = samples.iter().map(|s| s.x[j]).sum::<f64>() / n;
                        let var = samples.iter().map(|s| (s.x[j] - mean).powi(2)).sum::<f64>() / n;
                        factor * var.sqrt().max(1e-6)
                    })
                    .collect()
            }
        };
        self.delta = Some(delta);
    }

    fn end_warmup(&mut self) -> Result<StepOutcome> {
        let Phase::Warmup(buffer) = std::mem::replace(&mut self.phase, Phase::Training) else {
            return Ok(StepOutcome::default());
        };
        self.set_delta(&buffer);
        self.begin_level(true)?;
        let mut outcome = StepOutcome::default();
        for sample in &buffer {
            let step = self.train(sample)?;
            if step.level_completed.is_some() {
                outcome.level_completed = step.level_completed;
            }
            if step.terminated {
                outcome.terminated = true;
                break;
            }
        }
        Ok(outcome)
    }

    /// Starts a temperature level at the current `λ`.
    fn begin_level(&mut self, perturb: bool) -> Result<()> {
        // a codebook already at k_max cannot grow, so its cells stay whole
        if perturb && self.codevectors.len() < self.config.k_max {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(self.perturbations);
            self.perturbations += 1;
            self.perturb_codebook(&mut rng)?;
        }
        self.step_index = 0;
        self.hits = vec![0; self.codevectors.len()];
        self.level = LevelTracker {
            snapshot: self.locations(),
            ..Default::default()
        };
        Ok(())
    }

    /// Error or score of the current model on `sample`, measured before the
    /// update it triggers.
    fn online_metric(&self, sample: &Sample, region: usize) -> f64 {
        match (&self.task, sample.target) {
            (Task::ConstantRegression | Task::AffineRegression { .. }, Target::Value(y)) => {
                let pred = self.codevectors[region]
                    .model
                    .as_ref()
                    .map_or(0.0, |m| m.predict(&sample.x));
                (pred - y).powi(2)
            }
            (Task::Classification, Target::Label(l)) => {
                let predicted = self.scratch_argmax_label();
                f64::from(u8::from(predicted == Some(l)))
            }
            _ => self
                .divergence
                .eval_unchecked(&sample.x, &self.codevectors[region].location),
        }
    }

    fn scratch_argmax_label(&self) -> Option<Label> {
        let mut best: Option<(f64, Label)> = None;
        for (p, cv) in self.scratch.iter().zip(&self.codevectors) {
            if let Some(l) = cv.label {
                if best.is_none_or(|(bp, _)| *p > bp) {
                    best = Some((*p, l));
                }
            }
        }
        best.map(|(_, l)| l)
    }

    /// One stochastic approximation update at the current temperature.
    /// Returns the pre-update metric for the observation.
    fn update(&mut self, sample: &Sample) -> Result<f64> {
        if let (Task::Classification, Target::Label(l)) = (&self.task, sample.target) {
            if self.maybe_insert_class(&sample.x, l) {
                self.level.snapshot.push(sample.x.clone());
                self.hits.push(0);
            }
        }
        let mut weights = std::mem::take(&mut self.scratch);
        self.memberships_into(&sample.x, &mut weights)?;
        self.scratch = weights;

        let region = self.nearest_unchecked(&sample.x);
        let metric = self.online_metric(sample, region);
        let winner = match sample.target {
            Target::Label(l) => self.nearest_with_label(&sample.x, l).unwrap_or(region),
            _ => region,
        };
        self.hits[winner] += 1;

        self.step_index += 1;
        let n = self.step_index;
        let alpha = self.config.alpha(n);
        let x = &sample.x;
        match (&self.task, sample.target) {
            (Task::Classification, Target::Label(l)) => {
                for (cv, &p) in self.codevectors.iter_mut().zip(&self.scratch) {
                    let gate = if cv.label == Some(l) { p } else { 0.0 };
                    sa_step(cv, x, gate, alpha)?;
                }
            }
            (Task::ConstantRegression, Target::Value(y)) => {
                for (cv, &p) in self.codevectors.iter_mut().zip(&self.scratch) {
                    sa_step(cv, x, p, alpha)?;
                    constant_model_step(cv, y, p, alpha);
                }
            }
            (Task::AffineRegression { stepsizes }, Target::Value(y)) => {
                let beta = stepsizes.beta(n);
                for (cv, &p) in self.codevectors.iter_mut().zip(&self.scratch) {
                    sa_step(cv, x, p, alpha)?;
                }
                if let Some(model) = self.codevectors[region].model.as_mut() {
                    sgd_model_step(model, x, y, beta)?;
                }
            }
            _ => {
                for (cv, &p) in self.codevectors.iter_mut().zip(&self.scratch) {
                    sa_step(cv, x, p, alpha)?;
                }
            }
        }
        Ok(metric)
    }

    /// Updates the window statistics; returns the convergence status when a
    /// window closes.
    fn close_window(&mut self, metric: f64) -> Option<ConvergenceStatus> {
        self.level.window_metric += metric;
        self.level.window_count += 1;
        let window_done = self.step_index % self.config.convergence_window == 0;
        let capped = self.step_index >= self.config.max_iters_per_level;
        if !window_done && !capped {
            return None;
        }
        if self.level.window_count > 0 {
            self.level.last_metric = Some(self.level.window_metric / self.level.window_count as f64);
        }
        self.level.window_metric = 0.0;
        self.level.window_count = 0;
        let status = self.converged_at_level(&self.level.snapshot);
        self.level.snapshot = self.locations();
        Some(status)
    }

    fn train(&mut self, sample: &Sample) -> Result<StepOutcome> {
        let metric = self.update(sample)?;
        match self.close_window(metric) {
            Some(ConvergenceStatus::Converged | ConvergenceStatus::IterationCap) => self.end_level(),
            _ => Ok(StepOutcome::default()),
        }
    }

    fn end_level(&mut self) -> Result<StepOutcome> {
        self.merge_effective()?;
        self.remove_idle();
        let point = CurvePoint {
            lambda: self.lambda,
            temperature: temperature(self.lambda),
            metric: self.level.last_metric.unwrap_or(f64::NAN),
            codevector_count: self.codevectors.len(),
            samples_observed: self.samples_seen,
            elapsed_seconds: self.elapsed(),
        };
        self.curve_log.push(point.clone());

        let next = self.lambda * self.config.gamma;
        let stop = if !self.hold_size && self.codevectors.len() >= self.config.k_max {
            Some(StopReason::KMax)
        } else if next < self.config.lambda_min {
            Some(StopReason::LambdaMin)
        } else {
            None
        };
        match stop {
            Some(reason) => self.phase = Phase::Terminated(reason),
            None => {
                self.lambda = next;
                self.begin_level(!self.hold_size)?;
            }
        }
        Ok(StepOutcome {
            level_completed: Some(point),
            terminated: stop.is_some(),
        })
    }

    /// Resumes a schedule that stopped on `k_max`: the temperature keeps
    /// decreasing down to `lambda_min` but the codebook is no longer
    /// perturbed. Returns false when there is nothing left to resume.
    pub fn keep_cooling(&mut self) -> Result<bool> {
        // restored learners never recorded a perturbation size and stay frozen
        if !matches!(self.phase, Phase::Terminated(StopReason::KMax)) || self.delta.is_none() {
            return Ok(false);
        }
        let next = self.lambda * self.config.gamma;
        if next < self.config.lambda_min {
            return Ok(false);
        }
        self.hold_size = true;
        self.lambda = next;
        self.phase = Phase::Training;
        self.begin_level(false)?;
        Ok(true)
    }

    /// Runs stochastic approximation at the current `λ`, without perturbing,
    /// merging or lowering the temperature, until the codebook converges or
    /// the stream ends.
    pub fn settle<I, S>(&mut self, stream: I) -> Result<ConvergenceStatus>
    where
        I: IntoIterator<Item = S>,
        S: Into<Sample>,
    {
        if self.codevectors.is_empty() {
            return Err(OdaError::config("cannot settle an empty codebook"));
        }
        self.step_index = 0;
        self.level = LevelTracker {
            snapshot: self.locations(),
            ..Default::default()
        };
        for sample in stream {
            let sample = sample.into();
            self.validate_sample(&sample)?;
            self.record_arrival(&sample);
            let metric = self.update(&sample)?;
            match self.close_window(metric) {
                Some(ConvergenceStatus::NotConverged) | None => {}
                Some(status) => return Ok(status),
            }
        }
        Ok(ConvergenceStatus::NotConverged)
    }

    /// Resets the per-cell hit counts to the cell occupancy of `batch`.
    ///
    /// For classification learners each labelled sample is credited to the
    /// nearest codevector carrying its label.
    pub fn recount_hits<'a, I>(&mut self, batch: I) -> Result<u64>
    where
        I: IntoIterator<Item = &'a Sample>,
    {
        let mut hits = vec![0u64; self.codevectors.len()];
        let mut total = 0;
        for s in batch {
            let cell = match s.target {
                Target::Label(l) if self.task == Task::Classification => match self.nearest_with_label(&s.x, l) {
                    Some(i) => i,
                    None => continue,
                },
                _ => self.predict_region(&s.x)?,
            };
            hits[cell] += 1;
            total += 1;
        }
        self.hits = hits;
        Ok(total)
    }
}

/// Extra state persisted in snapshots beyond the codebook itself.
#[derive(Debug, Clone, Default)]
pub(crate) struct RestoredExtras {
    pub samples_seen: u64,
    pub hits: Vec<u64>,
    pub label_counts: BTreeMap<Label, u64>,
    pub bounds: Option<Bounds>,
    pub seed: u64,
    pub stop_reason: Option<StopReason>,
}

/// Runs the full annealing schedule on a stream of unlabelled observations.
pub fn anneal_fit<I, S, R>(stream: I, config: AnnealingConfig, divergence: DivergenceKind, rng: &mut R) -> Result<OdaState>
where
    I: IntoIterator<Item = S>,
    S: Into<Sample>,
    R: rand::RngCore,
{
    let mut state = OdaState::new(config, divergence, Task::Clustering, rng.next_u64())?;
    state.fit(stream)?;
    Ok(state)
}
