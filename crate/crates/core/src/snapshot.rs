//! JSON snapshots of trained models.
//!
//! A flat model is stored as
//!
//! ```text
//! { "version": 1, "kind": "flat", "divergence": …, "lambda": …, "config": …,
//!   "codevectors": [{ "location", "prior", "weighted_sum", "label"?, "model_params"? }],
//!   "curve_log": [...], … }
//! ```
//!
//! and a tree as a recursive document of node records keyed by `path_id`,
//! each embedding a flat record. Numbers are written with enough digits to
//! read back the exact same `f64`.
//!
//! Restored learners are frozen: they predict exactly like the saved model
//! but do not resume training.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::Bounds;
use crate::error::{OdaError, Result};
use crate::oda::{
    AnnealingConfig, Codevector, CurvePoint, Label, OdaState, RestoredExtras, StopReason, Task,
};
use crate::tree::{NodeStatus, SplitEvent, Tree, TreeNode, TreeSpec};
use crate::DivergenceKind;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatRecord {
    pub divergence: DivergenceKind,
    pub lambda: f64,
    pub config: AnnealingConfig,
    pub task: Task,
    pub codevectors: Vec<Codevector>,
    pub curve_log: Vec<CurvePoint>,
    pub samples_seen: u64,
    pub hits: Vec<u64>,
    #[serde(default, with = "label_pairs")]
    pub label_counts: BTreeMap<Label, u64>,
    #[serde(default)]
    pub bounds: Option<Bounds>,
    pub seed: u64,
    #[serde(default)]
    pub stop_reason: Option<StopReason>,
}

/// Label counts as `[[label, count], …]`. Integer map keys do not survive
/// the buffering that the flattened document body goes through.
mod label_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::oda::Label;

    pub fn serialize<S: Serializer>(map: &BTreeMap<Label, u64>, s: S) -> Result<S::Ok, S::Error> {
        map.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Label, u64>, D::Error> {
        Ok(Vec::<(Label, u64)>::deserialize(d)?.into_iter().collect())
    }
}

impl From<&OdaState> for FlatRecord {
    fn from(s: &OdaState) -> Self {
        FlatRecord {
            divergence: s.divergence,
            lambda: s.lambda,
            config: s.config.clone(),
            task: s.task.clone(),
            codevectors: s.codevectors.clone(),
            curve_log: s.curve_log.clone(),
            samples_seen: s.samples_seen,
            hits: s.hits.clone(),
            label_counts: s.label_counts.clone(),
            bounds: s.bounds.clone(),
            seed: s.seed(),
            stop_reason: s.stop_reason(),
        }
    }
}

impl FlatRecord {
    pub fn into_state(self) -> Result<OdaState> {
        if let Some(dim) = self.codevectors.first().map(|cv| cv.location.len()) {
            for cv in &self.codevectors {
                if cv.location.len() != dim || cv.weighted_sum.len() != dim {
                    return Err(OdaError::CorruptState("codevectors disagree on dimension".into()));
                }
            }
        }
        Ok(OdaState::restore(
            self.config,
            self.divergence,
            self.task,
            self.lambda,
            self.codevectors,
            self.curve_log,
            RestoredExtras {
                samples_seen: self.samples_seen,
                hits: self.hits,
                label_counts: self.label_counts,
                bounds: self.bounds,
                seed: self.seed,
                stop_reason: self.stop_reason,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub path_id: String,
    pub status: NodeStatus,
    pub level: usize,
    pub updates: u64,
    pub state: FlatRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeRecord>,
}

impl From<&TreeNode> for NodeRecord {
    fn from(n: &TreeNode) -> Self {
        NodeRecord {
            path_id: n.path_id.clone(),
            status: n.status,
            level: n.level,
            updates: n.updates,
            state: FlatRecord::from(&n.oda),
            children: n.children.iter().map(NodeRecord::from).collect(),
        }
    }
}

impl NodeRecord {
    fn into_node(self) -> Result<TreeNode> {
        if (self.status == NodeStatus::Internal) == self.children.is_empty() {
            return Err(OdaError::CorruptState(format!(
                "node {} is {:?} with {} children",
                self.path_id,
                self.status,
                self.children.len()
            )));
        }
        if self.status == NodeStatus::Internal && self.children.len() != self.state.codevectors.len() {
            return Err(OdaError::CorruptState(format!(
                "node {} has {} cells but {} children",
                self.path_id,
                self.state.codevectors.len(),
                self.children.len()
            )));
        }
        Ok(TreeNode {
            path_id: self.path_id,
            status: self.status,
            level: self.level,
            updates: self.updates,
            oda: self.state.into_state()?,
            children: self.children.into_iter().map(NodeRecord::into_node).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    /// Node factory, including the resolution pyramid used for routing.
    pub spec: TreeSpec,
    pub samples_seen: u64,
    pub curve_log: Vec<CurvePoint>,
    pub split_log: Vec<SplitEvent>,
    pub bounds: Option<Bounds>,
    pub root: NodeRecord,
}

#[derive(Debug, Clone)]
pub enum Model {
    Flat(OdaState),
    Tree(Tree),
}

impl Model {
    pub fn curve_log(&self) -> &[CurvePoint] {
        match self {
            Model::Flat(s) => &s.curve_log,
            Model::Tree(t) => &t.curve_log,
        }
    }

    pub fn task(&self) -> &Task {
        match self {
            Model::Flat(s) => &s.task,
            Model::Tree(t) => &t.spec.task,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Body {
    Flat(FlatRecord),
    Tree(TreeRecord),
}

#[derive(Debug, Serialize, Deserialize)]
struct Document {
    version: u32,
    #[serde(flatten)]
    body: Body,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

pub fn to_json(model: &Model) -> Result<String> {
    let body = match model {
        Model::Flat(s) => Body::Flat(FlatRecord::from(s)),
        Model::Tree(t) => Body::Tree(TreeRecord {
            spec: t.spec.clone(),
            samples_seen: t.samples_seen,
            curve_log: t.curve_log.clone(),
            split_log: t.split_log.clone(),
            bounds: t.bounds.clone(),
            root: NodeRecord::from(&t.root),
        }),
    };
    Ok(serde_json::to_string_pretty(&Document {
        version: SNAPSHOT_VERSION,
        body,
    })?)
}

pub fn from_json(text: &str) -> Result<Model> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.version != SNAPSHOT_VERSION {
        return Err(OdaError::VersionMismatch {
            expected: SNAPSHOT_VERSION,
            found: probe.version,
        });
    }
    let doc: Document = serde_json::from_str(text)?;
    Ok(match doc.body {
        Body::Flat(f) => Model::Flat(f.into_state()?),
        Body::Tree(t) => Model::Tree(Tree::from_parts(
            t.root.into_node()?,
            t.spec,
            t.samples_seen,
            t.curve_log,
            t.split_log,
            t.bounds,
        )),
    })
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    fs::write(path, to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    from_json(&fs::read_to_string(path)?)
}
