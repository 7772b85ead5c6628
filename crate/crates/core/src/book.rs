//! Guide chapters compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub struct Introduction;

#[doc = include_str!("../../../book/src/divergences.md")]
pub struct Divergences;

#[doc = include_str!("../../../book/src/annealing.md")]
pub struct Annealing;

#[doc = include_str!("../../../book/src/regression.md")]
pub struct Regression;

#[doc = include_str!("../../../book/src/classification.md")]
pub struct Classification;

#[doc = include_str!("../../../book/src/trees.md")]
pub struct Trees;

#[doc = include_str!("../../../book/src/multires.md")]
pub struct Multires;

#[doc = include_str!("../../../book/src/io.md")]
pub struct Io;
