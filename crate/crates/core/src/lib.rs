//! Online deterministic annealing.
//!
//! A stochastic-approximation learner that grows a codebook of prototypes as
//! a temperature parameter is lowered, supporting clustering, regression with
//! local models, classification, tree-structured partitions and
//! multi-resolution features.

pub mod classify;
pub mod data;
pub mod density;
pub mod divergence;
pub mod error;
pub mod local_models;
pub mod multires;
pub mod oda;
pub mod snapshot;
pub mod tree;

#[cfg(doctest)]
mod book;

pub use crate::divergence::DivergenceKind;
pub use crate::error::{OdaError, Result};
pub use crate::oda::{
    anneal_fit, AnnealingConfig, Codevector, CurvePoint, Label, OdaState, Perturbation, Sample, StopReason, Target,
    Task,
};
