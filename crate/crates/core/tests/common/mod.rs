//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from `restarts` k-means++ seedings; returns the best
/// centers by training distortion.
pub fn lloyd(batch: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..restarts {
        let mut centers = vec![batch[rng.random_range(0..batch.len())].clone()];
        while centers.len() < k {
            let d: Vec<f64> = batch
                .iter()
                .map(|x| centers.iter().map(|c| sq_dist(x, c)).fold(f64::INFINITY, f64::min))
                .collect();
            let total: f64 = d.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = batch.len() - 1;
            for (i, di) in d.iter().enumerate() {
                u -= di;
                if u <= 0.0 {
                    pick = i;
                    break;
                }
            }
            centers.push(batch[pick].clone());
        }
        let dim = batch[0].len();
        let mut assign = vec![usize::MAX; batch.len()];
        for _ in 0..300 {
            let mut changed = false;
            for (i, x) in batch.iter().enumerate() {
                let a = nearest(&centers, x);
                if a != assign[i] {
                    assign[i] = a;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (x, &a) in batch.iter().zip(&assign) {
                counts[a] += 1;
                for (s, v) in sums[a].iter_mut().zip(x) {
                    *s += v;
                }
            }
            for j in 0..k {
                if counts[j] > 0 {
                    centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
                }
            }
        }
        let cost = distortion(&centers, batch);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, centers));
        }
    }
    best.unwrap().1
}

pub fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < bd {
            bd = d;
            best = j;
        }
    }
    best
}

pub fn distortion(centers: &[Vec<f64>], batch: &[Vec<f64>]) -> f64 {
    batch.iter().map(|x| sq_dist(x, &centers[nearest(centers, x)])).sum::<f64>() / batch.len() as f64
}

/// Ordinary least squares `y ≈ w·x + b` for 1-D inputs; returns `(w, b)`.
pub fn ols_1d(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let w = sxy / sxx;
    (w, my - w * mx)
}

pub fn gaussian_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Bayes accuracy of two equally likely isotropic 2-D Gaussians, by
/// midpoint-rule integration of `max_j π_j p_j` over a wide box.
pub fn bayes_accuracy_2d(m0: [f64; 2], m1: [f64; 2], sd: f64) -> f64 {
    let (lo, hi, steps) = (-10.0, 10.0, 2000);
    let h = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for i in 0..steps {
        let x = lo + (i as f64 + 0.5) * h;
        for j in 0..steps {
            let y = lo + (j as f64 + 0.5) * h;
            let p0 = gaussian_pdf(x, m0[0], sd) * gaussian_pdf(y, m0[1], sd);
            let p1 = gaussian_pdf(x, m1[0], sd) * gaussian_pdf(y, m1[1], sd);
            acc += 0.5 * p0.max(p1) * h * h;
        }
    }
    acc
}
