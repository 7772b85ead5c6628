//! Dyadic averaging pyramids.
//!
//! Level `l + 1` halves the length of level `l` by averaging neighbouring
//! coordinates, padding odd lengths with a zero. Level `l` of a
//! `d`-dimensional vector therefore has `⌈d / 2ˡ⌉` coordinates, and every
//! level can be computed either step by step or directly from the original
//! vector with the same result.
//!
//! A tree trained with a pyramid of depth `l̃` routes and trains a node at
//! tree level `r` on resolution `max(l̃ − r, 0)`: the root sees the coarsest
//! features and the deepest nodes see the original vector.

use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};

/// How odd-length levels are completed before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Padding {
    #[default]
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResolutionPyramid {
    pub depth: usize,
    #[serde(default)]
    pub padding: Padding,
}

/// All resolutions of one observation, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResSample {
    pub levels: Vec<Vec<f64>>,
}

impl MultiResSample {
    /// The vector at resolution `level`.
    pub fn level(&self, level: usize) -> Result<&[f64]> {
        self.levels
            .get(level)
            .map(Vec::as_slice)
            .ok_or_else(|| OdaError::DimensionMismatch {
                expected: level + 1,
                found: self.levels.len(),
            })
    }

    pub fn full(&self) -> &[f64] {
        &self.levels[0]
    }
}

impl ResolutionPyramid {
    pub fn new(depth: usize) -> Self {
        ResolutionPyramid {
            depth,
            padding: Padding::Zero,
        }
    }

    pub fn build(&self, x: &[f64]) -> MultiResSample {
        MultiResSample {
            levels: build_pyramid(x, self.depth),
        }
    }

    /// Resolution used by nodes at tree level `tree_level`.
    pub fn resolution_for(&self, tree_level: usize) -> usize {
        self.depth.saturating_sub(tree_level)
    }

    /// Number of coordinates at `level` for `dim`-dimensional inputs.
    pub fn level_dim(dim: usize, level: usize) -> usize {
        let block = 1usize << level;
        dim.div_ceil(block)
    }
}

/// One dyadic averaging step.
pub fn reduce(x: &[f64]) -> Vec<f64> {
    x.chunks(2)
        .map(|pair| (pair[0] + pair.get(1).copied().unwrap_or(0.0)) / 2.0)
        .collect()
}

/// `[x⁰, x¹, …, x^depth]` with `x⁰ = x`.
pub fn build_pyramid(x: &[f64], depth: usize) -> Vec<Vec<f64>> {
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(x.to_vec());
    for l in 0..depth {
        let next = reduce(&levels[l]);
        levels.push(next);
    }
    levels
}

/// Level `level` computed in one pass as block means over `2^level`
/// coordinates of the zero-padded input.
pub fn reduce_direct(x: &[f64], level: usize) -> Vec<f64> {
    let block = 1usize << level;
    let n = ResolutionPyramid::level_dim(x.len(), level);
    (0..n)
        .map(|j| x.iter().skip(j * block).take(block).sum::<f64>() / block as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let p = build_pyramid(&[1.0, 3.0, 5.0, 7.0], 2);
        assert_eq!(p, vec![vec![1.0, 3.0, 5.0, 7.0], vec![2.0, 6.0], vec![4.0]]);
        let p = build_pyramid(&[2.5; 6], 3);
        assert_eq!(p[1], vec![2.5; 3]);
        // padding kicks in on odd lengths, so only full blocks stay constant
        assert_eq!(p[2], vec![2.5, 1.25]);
        let p = build_pyramid(&[3.0], 1);
        assert_eq!(p[1], vec![1.5]);
        assert_eq!(build_pyramid(&[1.0, 2.0], 0), vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn constant_power_of_two_stays_constant() {
        for level in build_pyramid(&[4.0; 8], 3) {
            assert!(level.iter().all(|v| *v == 4.0));
        }
    }

    #[test]
    fn level_dims() {
        for d in 1..20 {
            let p = build_pyramid(&vec![1.0; d], 4);
            for (l, v) in p.iter().enumerate() {
                assert_eq!(v.len(), ResolutionPyramid::level_dim(d, l));
            }
        }
    }

    #[test]
    fn resolution_clamps_at_zero() {
        let p = ResolutionPyramid::new(2);
        assert_eq!(p.resolution_for(0), 2);
        assert_eq!(p.resolution_for(1), 1);
        assert_eq!(p.resolution_for(5), 0);
    }

    #[test]
    fn missing_level_is_a_dimension_error() {
        let s = ResolutionPyramid::new(1).build(&[1.0, 2.0]);
        assert!(s.level(1).is_ok());
        assert!(s.level(2).is_err());
    }

    proptest! {
        #[test]
        fn nesting(x in proptest::collection::vec(-100.0f64..100.0, 1..40), depth in 0usize..6) {
            let p = build_pyramid(&x, depth);
            for (l, level) in p.iter().enumerate() {
                let direct = reduce_direct(&x, l);
                prop_assert_eq!(level.len(), direct.len());
                for (a, b) in level.iter().zip(&direct) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn linearity(
            pair in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..30),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let x: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let (px, py, pc) = (build_pyramid(&x, 4), build_pyramid(&y, 4), build_pyramid(&combo, 4));
            for l in 0..=4 {
                for j in 0..pc[l].len() {
                    prop_assert!((pc[l][j] - (a * px[l][j] + b * py[l][j])).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn energy_contracts(x in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            let p = build_pyramid(&x, 5);
            for w in p.windows(2) {
                let e0: f64 = w[0].iter().map(|v| v * v).sum();
                let e1: f64 = w[1].iter().map(|v| v * v).sum();
                prop_assert!(e1 <= e0 + 1e-9);
            }
        }
    }
}
