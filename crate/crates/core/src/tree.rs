//! Tree-structured progressive partitioning.
//!
//! Every node owns a small annealing learner. Observations descend through
//! frozen internal nodes by nearest-codevector routing until they reach a
//! growing node, which trains on them. When a node's own schedule terminates
//! its cells become child nodes, each starting from a single codevector at the
//! temperature where the parent stopped. Regions with more probability mass
//! receive more observations and therefore grow first.
//!
//! With a [`ResolutionPyramid`] of depth `l̃` a node at level `r` routes and
//! trains on resolution `max(l̃ − r, 0)` of each observation.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{cell_density, Bounds};
use crate::divergence::temperature;
use crate::error::{OdaError, Result};
use crate::multires::{MultiResSample, ResolutionPyramid};
use crate::oda::{AnnealingConfig, Codevector, CurvePoint, Label, OdaState, Sample, Target, Task};
use crate::DivergenceKind;

/// Largest number of children per node; path ids use one base-36 digit per
/// level.
pub const MAX_BRANCHING: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Growing,
    Internal,
    LeafFinal,
}

/// When nodes stop annealing and whether they may split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCriterion {
    /// Codevector budget per level (the last entry repeats for deeper levels).
    pub k_target: Vec<usize>,
    /// Final temperature coefficient per level (last entry repeats).
    pub lambda_stop: Vec<f64>,
    pub max_depth: usize,
    /// Observations a node must have trained on before it may split.
    pub min_samples_to_split: u64,
}

impl Default for SplitCriterion {
    fn default() -> Self {
        SplitCriterion {
            k_target: vec![4],
            lambda_stop: vec![0.3, 0.1, 0.01],
            max_depth: 3,
            min_samples_to_split: 100,
        }
    }
}

impl SplitCriterion {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(OdaError::config("max_depth must be at least 1"));
        }
        if self.k_target.is_empty() || self.lambda_stop.is_empty() {
            return Err(OdaError::config("k_target and lambda_stop need at least one entry"));
        }
        if let Some(k) = self.k_target.iter().find(|k| !(2..=MAX_BRANCHING).contains(*k)) {
            return Err(OdaError::config(format!("k_target must lie in 2..={MAX_BRANCHING}, got {k}")));
        }
        if let Some(l) = self.lambda_stop.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(OdaError::config(format!("lambda_stop must lie in (0, 1), got {l}")));
        }
        Ok(())
    }

    pub fn k_target_at(&self, level: usize) -> usize {
        self.k_target[level.min(self.k_target.len() - 1)]
    }

    pub fn lambda_stop_at(&self, level: usize) -> f64 {
        self.lambda_stop[level.min(self.lambda_stop.len() - 1)]
    }
}

/// Everything needed to create the learner of any node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub config: AnnealingConfig,
    pub split: SplitCriterion,
    pub divergence: DivergenceKind,
    pub task: Task,
    pub pyramid: ResolutionPyramid,
    pub seed: u64,
}

impl TreeSpec {
    pub fn new(config: AnnealingConfig, split: SplitCriterion, divergence: DivergenceKind, task: Task, seed: u64) -> Self {
        TreeSpec {
            config,
            split,
            divergence,
            task,
            pyramid: ResolutionPyramid::default(),
            seed,
        }
    }

    pub fn with_pyramid(mut self, pyramid: ResolutionPyramid) -> Self {
        self.pyramid = pyramid;
        self
    }

    fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.config.validate()
    }

    /// Annealing configuration of a node at `level` that starts at
    /// `lambda_start`.
    pub fn node_config(&self, level: usize, lambda_start: f64) -> AnnealingConfig {
        let lambda_min = self.split.lambda_stop_at(level);
        let ceiling = self.config.lambda_start.max(lambda_min);
        let start = lambda_start.min(ceiling).max(lambda_min / self.config.gamma);
        AnnealingConfig {
            lambda_start: start.min(1.0 - 1e-9),
            lambda_min,
            k_max: self.split.k_target_at(level),
            ..self.config.clone()
        }
    }

    fn node(&self, level: usize, path_id: String, lambda_start: f64) -> Result<TreeNode> {
        let seed = node_seed(self.seed, &path_id);
        let oda = OdaState::new(self.node_config(level, lambda_start), self.divergence, self.task.clone(), seed)?;
        Ok(TreeNode {
            path_id,
            oda,
            children: Vec::new(),
            status: NodeStatus::Growing,
            level,
            updates: 0,
        })
    }

    fn resolution(&self, level: usize) -> usize {
        self.pyramid.resolution_for(level)
    }
}

/// Mixes the tree seed with a node path so every node draws an independent
/// perturbation stream regardless of training order.
fn node_seed(seed: u64, path_id: &str) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in path_id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
        h ^= h >> 29;
    }
    h
}

fn child_path(parent: &str, index: usize) -> String {
    let digit = char::from_digit(index as u32, MAX_BRANCHING as u32).expect("branching bounded by validation");
    format!("{parent}{digit}")
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Child indices from the root, root = `"0"`.
    pub path_id: String,
    pub oda: OdaState,
    pub children: Vec<TreeNode>,
    pub status: NodeStatus,
    pub level: usize,
    /// Observations routed to or through this node.
    pub updates: u64,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.status != NodeStatus::Internal
    }

    /// Collapses a node whose codevectors all carry the same label into one
    /// codevector at their prior-weighted mean, and freezes it.
    /// Returns whether the node was collapsed.
    pub fn same_class_prune(&mut self) -> bool {
        let cvs = &self.oda.codevectors;
        let Some(first) = cvs.first() else {
            return false;
        };
        if first.label.is_none() || cvs.iter().any(|cv| cv.label != first.label) {
            return false;
        }
        let label = first.label;
        let prior: f64 = cvs.iter().map(|cv| cv.prior).sum();
        let dim = first.location.len();
        let mut weighted_sum = vec![0.0; dim];
        for cv in cvs {
            for (s, v) in weighted_sum.iter_mut().zip(&cv.location) {
                *s += cv.prior * v;
            }
        }
        let location = weighted_sum.iter().map(|s| s / prior).collect();
        let mut merged = Codevector::new(location, prior);
        merged.weighted_sum = weighted_sum;
        merged.label = label;
        self.oda.codevectors = vec![merged];
        self.oda.hits = vec![self.oda.hits.iter().sum()];
        self.status = NodeStatus::LeafFinal;
        true
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        out.push(self);
        for c in &self.children {
            c.visit(out);
        }
    }

    fn cell_count(&self) -> usize {
        if self.status != NodeStatus::Internal {
            return self.oda.len();
        }
        self.children
            .iter()
            .map(|c| if c.oda.is_empty() { 1 } else { c.cell_count() })
            .sum()
    }

    /// Decides what happens once the node's schedule has terminated.
    fn conclude(&mut self, spec: &TreeSpec) -> Result<bool> {
        // k_target caps the codebook; the node keeps cooling to its λ_stop
        if self.oda.keep_cooling()? {
            return Ok(false);
        }
        if self.same_class_prune() {
            return Ok(false);
        }
        let can_split = self.oda.len() >= 2
            && self.level + 1 < spec.split.max_depth
            && self.updates >= spec.split.min_samples_to_split;
        if !can_split {
            self.status = NodeStatus::LeafFinal;
            return Ok(false);
        }
        let start = self.oda.lambda * spec.config.gamma;
        self.children = (0..self.oda.len())
            .map(|i| spec.node(self.level + 1, child_path(&self.path_id, i), start))
            .collect::<Result<_>>()?;
        self.status = NodeStatus::Internal;
        Ok(true)
    }
}

/// A cell of the tree partition: codevector `index` of node `path_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeCell {
    pub path_id: String,
    pub index: usize,
}

impl fmt::Display for TreeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.path_id, self.index)
    }
}

/// A split recorded in the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub path_id: String,
    pub level: usize,
    /// Tree-wide observation count when the split happened.
    pub at_sample: u64,
    pub children: usize,
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub root: TreeNode,
    pub spec: TreeSpec,
    pub samples_seen: u64,
    pub curve_log: Vec<CurvePoint>,
    pub split_log: Vec<SplitEvent>,
    pub bounds: Option<Bounds>,
    clock: Option<Instant>,
}

impl Tree {
    pub fn new(spec: TreeSpec) -> Result<Self> {
        spec.validate()?;
        let root = spec.node(0, "0".into(), spec.config.lambda_start)?;
        Ok(Tree {
            root,
            spec,
            samples_seen: 0,
            curve_log: Vec::new(),
            split_log: Vec::new(),
            bounds: None,
            clock: None,
        })
    }

    pub(crate) fn from_parts(
        root: TreeNode,
        spec: TreeSpec,
        samples_seen: u64,
        curve_log: Vec<CurvePoint>,
        split_log: Vec<SplitEvent>,
        bounds: Option<Bounds>,
    ) -> Self {
        Tree {
            root,
            spec,
            samples_seen,
            curve_log,
            split_log,
            bounds,
            clock: None,
        }
    }

    /// Every node in pre-order.
    pub fn nodes(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn node(&self, path_id: &str) -> Option<&TreeNode> {
        self.nodes().into_iter().find(|n| n.path_id == path_id)
    }

    pub fn depth(&self) -> usize {
        self.nodes().iter().map(|n| n.level + 1).max().unwrap_or(1)
    }

    /// Number of cells of the finest partition.
    pub fn cell_count(&self) -> usize {
        self.root.cell_count()
    }

    /// True once every node is either internal or a final leaf.
    pub fn is_complete(&self) -> bool {
        self.nodes().iter().all(|n| n.status != NodeStatus::Growing)
    }

    fn elapsed(&self) -> f64 {
        self.clock.map_or(0.0, |c| c.elapsed().as_secs_f64())
    }

    /// Routes one observation to its growing leaf and trains it.
    /// Returns whether a node split.
    pub fn update(&mut self, sample: Sample) -> Result<bool> {
        let mr = self.spec.pyramid.build(&sample.x);
        self.update_multires(&mr, sample.target)
    }

    /// Same as [`Tree::update`] for an observation whose resolutions are
    /// supplied by the caller.
    pub fn update_multires(&mut self, sample: &MultiResSample, target: Target) -> Result<bool> {
        if self.clock.is_none() {
            self.clock = Some(Instant::now());
        }
        let full = sample.full();
        match &mut self.bounds {
            Some(b) if b.dim() == full.len() => b.include(full),
            Some(b) => {
                return Err(OdaError::DimensionMismatch {
                    expected: b.dim(),
                    found: full.len(),
                })
            }
            None => self.bounds = Some(Bounds::from_point(full)),
        }
        self.samples_seen += 1;

        let Tree { root, spec, .. } = self;
        let mut node = root;
        loop {
            let x = sample.level(spec.resolution(node.level))?;
            node.updates += 1;
            match node.status {
                NodeStatus::Internal => {
                    let cell = node.oda.predict_region(x)?;
                    node = &mut node.children[cell];
                }
                NodeStatus::LeafFinal => return Ok(false),
                NodeStatus::Growing => break,
            }
        }
        let x = sample.level(spec.resolution(node.level))?.to_vec();
        let outcome = node.oda.observe(Sample::new(x, target))?;
        let split = if outcome.terminated {
            let split = node.conclude(spec)?;
            split.then(|| SplitEvent {
                path_id: node.path_id.clone(),
                level: node.level,
                at_sample: 0,
                children: node.children.len(),
            })
        } else {
            None
        };

        if let Some(mut point) = outcome.level_completed {
            point.codevector_count = self.cell_count();
            point.samples_observed = self.samples_seen;
            point.elapsed_seconds = self.elapsed();
            self.curve_log.push(point);
        }
        let did_split = split.is_some();
        if let Some(mut event) = split {
            event.at_sample = self.samples_seen;
            self.split_log.push(event);
        }
        Ok(did_split || outcome.terminated)
    }

    /// Trains on `stream` until it runs out or the tree is complete.
    pub fn fit<I, S>(&mut self, stream: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<Sample>,
    {
        for sample in stream {
            if self.update(sample.into())? && self.is_complete() {
                break;
            }
        }
        if self.root.oda.is_empty() {
            return Err(OdaError::EmptyStream);
        }
        Ok(())
    }

    /// Trains the tree from a batch, level by level. Each node anneals on
    /// the observations of its cell (cycled as needed) and sibling subtrees
    /// train in parallel on `workers` threads. The result does not depend on
    /// `workers`.
    pub fn fit_offline(spec: TreeSpec, batch: &[Sample], workers: usize) -> Result<Tree> {
        if batch.is_empty() {
            return Err(OdaError::EmptyStream);
        }
        let mut tree = Tree::new(spec)?;
        tree.clock = Some(Instant::now());
        let samples: Vec<(MultiResSample, Target)> = batch
            .iter()
            .map(|s| (tree.spec.pyramid.build(&s.x), s.target))
            .collect();
        tree.bounds = Bounds::from_points(samples.iter().map(|(m, _)| &m.levels[0]));
        tree.samples_seen = batch.len() as u64;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| OdaError::config(e.to_string()))?;
        let refs: Vec<&(MultiResSample, Target)> = samples.iter().collect();
        let spec = tree.spec.clone();
        pool.install(|| train_offline(&mut tree.root, &spec, refs))?;

        let elapsed = tree.elapsed();
        let mut curve = Vec::new();
        let mut splits = Vec::new();
        for node in tree.nodes() {
            curve.extend(node.oda.curve_log.iter().cloned().map(|mut p| {
                p.elapsed_seconds = elapsed;
                p
            }));
            if node.status == NodeStatus::Internal {
                splits.push(SplitEvent {
                    path_id: node.path_id.clone(),
                    level: node.level,
                    at_sample: node.updates,
                    children: node.children.len(),
                });
            }
        }
        tree.curve_log = curve;
        tree.split_log = splits;
        Ok(tree)
    }

    /// Descends to the finest trained cell containing the observation.
    /// Also returns the number of divergence evaluations spent.
    fn descend(&self, sample: &MultiResSample, max_level: Option<usize>) -> Result<(&TreeNode, usize, usize)> {
        let mut node = &self.root;
        let mut evals = 0;
        loop {
            if node.oda.is_empty() {
                return Err(OdaError::CorruptState("tree has not been trained".into()));
            }
            let x = sample.level(self.spec.resolution(node.level))?;
            let cell = node.oda.predict_region(x)?;
            evals += node.oda.len();
            let stop = max_level.is_some_and(|m| node.level >= m);
            if node.status == NodeStatus::Internal && !stop && !node.children[cell].oda.is_empty() {
                node = &node.children[cell];
            } else {
                return Ok((node, cell, evals));
            }
        }
    }

    /// The node where the descent of `x` ends.
    pub fn route(&self, x: &[f64]) -> Result<&TreeNode> {
        Ok(self.descend(&self.spec.pyramid.build(x), None)?.0)
    }

    pub fn predict_cell(&self, x: &[f64]) -> Result<TreeCell> {
        Ok(self.route_with_count(x)?.0)
    }

    /// Cell of `x` with the number of divergence evaluations of the forward
    /// pass.
    pub fn route_with_count(&self, x: &[f64]) -> Result<(TreeCell, usize)> {
        self.mr_route_with_count(&self.spec.pyramid.build(x))
    }

    pub fn mr_route_with_count(&self, sample: &MultiResSample) -> Result<(TreeCell, usize)> {
        let (node, index, evals) = self.descend(sample, None)?;
        Ok((
            TreeCell {
                path_id: node.path_id.clone(),
                index,
            },
            evals,
        ))
    }

    pub fn predict_value(&self, x: &[f64]) -> Result<f64> {
        self.predict_value_at_depth(x, usize::MAX)
    }

    /// Prediction of the partition truncated below tree level `depth`.
    pub fn predict_value_at_depth(&self, x: &[f64], depth: usize) -> Result<f64> {
        let sample = self.spec.pyramid.build(x);
        let (node, cell, _) = self.descend(&sample, Some(depth))?;
        let xr = sample.level(self.spec.resolution(node.level))?;
        node.oda.codevectors[cell]
            .model
            .as_ref()
            .map(|m| m.predict(xr))
            .ok_or_else(|| OdaError::config("tree carries no local models"))
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<Label> {
        self.mr_predict_label(&self.spec.pyramid.build(x))
    }

    pub fn mr_predict_label(&self, sample: &MultiResSample) -> Result<Label> {
        let (node, cell, _) = self.descend(sample, None)?;
        if node.is_leaf() {
            node.oda.nn_predict(sample.level(self.spec.resolution(node.level))?)
        } else {
            node.oda.codevectors[cell]
                .label
                .ok_or_else(|| OdaError::CorruptState("codevector without label".into()))
        }
    }

    /// Mean divergence between each observation and the codevector of its
    /// cell, measured at that cell's resolution.
    pub fn average_distortion(&self, batch: &[Vec<f64>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(OdaError::config("average_distortion needs a non-empty batch"));
        }
        let mut total = 0.0;
        for x in batch {
            let sample = self.spec.pyramid.build(x);
            let (node, cell, _) = self.descend(&sample, None)?;
            let xr = sample.level(self.spec.resolution(node.level))?;
            total += self.spec.divergence.eval_unchecked(xr, &node.oda.codevectors[cell].location);
        }
        Ok(total / batch.len() as f64)
    }

    /// Piecewise-constant density over the finest cells: cell counts of
    /// `batch` divided by Monte Carlo cell volumes inside `bounds`
    /// (defaults to the observed bounding box).
    pub fn density<R: Rng + ?Sized>(
        &self,
        batch: &[Vec<f64>],
        bounds: Option<&Bounds>,
        volume_samples: usize,
        rng: &mut R,
    ) -> Result<TreeDensity> {
        let bounds = bounds
            .or(self.bounds.as_ref())
            .ok_or_else(|| OdaError::CorruptState("no observations recorded".into()))?
            .padded();
        let mut cells: BTreeMap<TreeCell, (u64, f64)> = BTreeMap::new();
        for x in batch {
            cells.entry(self.predict_cell(x)?).or_default().0 += 1;
        }
        let unit = bounds.volume() / volume_samples.max(1) as f64;
        for _ in 0..volume_samples {
            let p = bounds.sample(rng);
            cells.entry(self.predict_cell(&p)?).or_default().1 += unit;
        }
        Ok(TreeDensity {
            cells,
            n_total: batch.len() as u64,
        })
    }
}

fn train_offline(node: &mut TreeNode, spec: &TreeSpec, data: Vec<&(MultiResSample, Target)>) -> Result<()> {
    if data.is_empty() {
        return Ok(());
    }
    let res = spec.resolution(node.level);
    let samples: Vec<Sample> = data
        .iter()
        .map(|(m, t)| Ok(Sample::new(m.level(res)?.to_vec(), *t)))
        .collect::<Result<_>>()?;
    let config = &node.oda.config;
    let cap = config.max_iters_per_level as usize * (config.schedule_len() + 1);
    let passes = cap.div_ceil(samples.len()).max(1);
    node.updates = samples.len() as u64;
    loop {
        node.oda.fit(
            std::iter::repeat_n(&samples, passes)
                .flatten()
                .take(cap.max(samples.len()))
                .cloned(),
        )?;
        if node.conclude(spec)? {
            break;
        }
        if node.status != NodeStatus::Growing {
            return Ok(());
        }
    }
    let mut parts: Vec<Vec<&(MultiResSample, Target)>> = vec![Vec::new(); node.children.len()];
    for (item, s) in data.into_iter().zip(&samples) {
        parts[node.oda.predict_region(&s.x)?].push(item);
    }
    node.children
        .par_iter_mut()
        .zip(parts)
        .try_for_each(|(child, part)| train_offline(child, spec, part))
}

/// Frozen tree density estimate.
#[derive(Debug, Clone)]
pub struct TreeDensity {
    /// Hits and estimated volume of every cell met.
    pub cells: BTreeMap<TreeCell, (u64, f64)>,
    pub n_total: u64,
}

impl TreeDensity {
    pub fn density_at(&self, tree: &Tree, x: &[f64]) -> Result<f64> {
        let cell = tree.predict_cell(x)?;
        match self.cells.get(&cell) {
            Some(&(hits, volume)) => cell_density(cell.index, hits, self.n_total, volume),
            None => Ok(0.0),
        }
    }
}

/// `λ` values of the tree curve expressed as temperatures.
pub fn curve_temperatures(tree: &Tree) -> Vec<f64> {
    tree.curve_log.iter().map(|p| temperature(p.lambda)).collect()
}
