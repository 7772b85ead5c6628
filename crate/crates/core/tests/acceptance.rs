//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p oda --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use oda::classify::{classify_fit, ClassDensity};
use oda::data::{class2d_two, mix1d_two, mix2d_four, piecewise_affine, regression_sample, sample_mixture, write_curves};
use oda::density::{Bounds, DEFAULT_VOLUME_SAMPLES};
use oda::local_models::{two_timescale_fit, LocalModel, TwoTimescaleStepsizes};
use oda::multires::ResolutionPyramid;
use oda::oda::{critical_lambda, ConvergenceStatus};
use oda::snapshot::{from_json, to_json, Model};
use oda::tree::{NodeStatus, SplitCriterion, Tree, TreeSpec};
use oda::{AnnealingConfig, Codevector, DivergenceKind, OdaState, Sample, Target, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const EUCLID: DivergenceKind = DivergenceKind::SquaredEuclidean;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [(&str, Criterion); 12] = [
        ("gibbs normalization and lambda->1 limit", gibbs),
        ("centroid fixed point", centroid),
        ("bifurcation at the critical temperature", bifurcation),
        ("distortion within 1.2x of Lloyd", distortion_quality),
        ("monotone curves", monotone_curves),
        ("density consistency", density_consistency),
        ("classification accuracy", classification),
        ("piecewise-constant regression tree", constant_regression),
        ("two-timescale affine models", two_timescale),
        ("tree complexity", tree_complexity),
        ("multi-resolution tree", multiresolution),
        ("determinism and persistence", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} [{tag}] {name}: {} ({:.1}s)",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn frozen(locations: Vec<Vec<f64>>, priors: Vec<f64>, lambda: f64) -> OdaState {
    let cvs = locations
        .into_iter()
        .zip(priors)
        .map(|(l, p)| Codevector::new(l, p))
        .collect();
    OdaState::with_codebook(AnnealingConfig::default(), EUCLID, Task::Clustering, cvs, lambda, 0).unwrap()
}

fn gibbs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sum: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    for case in 0..1000 {
        let k = rng.random_range(1..10);
        let dim = rng.random_range(1..5);
        let locs: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.random_range(-20.0..20.0)).collect())
            .collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(1e-3..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let priors: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-20.0..20.0)).collect();
        let lambda = match case % 4 {
            0 => 1.0 - 1e-9,
            1 => 0.01,
            2 => 1e-4,
            _ => rng.random_range(0.01..0.999),
        };
        let s = frozen(locs.clone(), priors.clone(), lambda);
        let p = s.gibbs_memberships(&x).unwrap();
        worst_sum = worst_sum.max((p.iter().sum::<f64>() - 1.0).abs());

        let s = frozen(locs, priors.clone(), 1.0 - 1e-9);
        let p = s.gibbs_memberships(&x).unwrap();
        for (pi, rho) in p.iter().zip(&priors) {
            worst_limit = worst_limit.max((pi - rho).abs());
        }
    }
    outcome(
        worst_sum < 1e-12 && worst_limit < 1e-6,
        format!("max |sum-1| = {worst_sum:.2e}, max |p-rho| at lambda=1-1e-9 = {worst_limit:.2e}"),
    )
}

fn centroid() -> Outcome {
    let batch: Vec<Vec<f64>> = sample_mixture(&mix2d_four(21), 5000)
        .unwrap()
        .into_iter()
        .map(|s| s.x)
        .collect();
    // stop once the four mixture components are resolved
    let config = AnnealingConfig {
        lambda_min: 0.6,
        ..Default::default()
    };
    let mut state = OdaState::new(config, EUCLID, Task::Clustering, 21).unwrap();
    state.fit(batch.iter().cycle().take(400_000).cloned()).unwrap();

    // stochastic approximation at the final λ on the frozen batch, one pass
    // per round. With a = N the running sums keep weight N on their previous
    // value, so a pass that leaves them unchanged is a batch fixed point.
    let eps_c = state.config.eps_converge;
    state.config.eps_converge = 1e-12;
    state.config.stepsize_a = batch.len() as f64;
    state.config.stepsize_b = 1.0;
    state.config.convergence_window = batch.len() as u64;
    state.config.max_iters_per_level = batch.len() as u64;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let status = state.settle(batch.iter().cloned()).unwrap();
        if status == ConvergenceStatus::Converged || rounds >= 500 {
            break;
        }
    }

    let dim = 2;
    let k = state.len();
    let mut num = vec![vec![0.0; dim]; k];
    let mut den = vec![0.0; k];
    for x in &batch {
        let p = state.gibbs_memberships(x).unwrap();
        for i in 0..k {
            den[i] += p[i];
            for j in 0..dim {
                num[i][j] += x[j] * p[i];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..dim {
            worst = worst.max((state.codevectors[i].location[j] - num[i][j] / den[i]).abs());
        }
    }
    outcome(
        worst < 10.0 * eps_c,
        format!(
            "K={k}, lambda={:.4}, {rounds} settle passes, max coordinate gap {worst:.2e} (bound {:.0e})",
            state.lambda,
            10.0 * eps_c
        ),
    )
}

fn bifurcation() -> Outcome {
    let spec = mix1d_two(7);
    let batch: Vec<Vec<f64>> = sample_mixture(&spec, 10_000).unwrap().into_iter().map(|s| s.x).collect();
    let lambda_star = critical_lambda(EUCLID, &batch).unwrap();
    let t_star = lambda_star / (1.0 - lambda_star);
    let config = AnnealingConfig {
        gamma: 0.95,
        lambda_min: 0.3,
        ..Default::default()
    };
    let mut state = OdaState::new(config, EUCLID, Task::Clustering, 7).unwrap();
    state.fit(spec.stream().map(|s| Sample::from(s.x)).take(3_000_000)).unwrap();
    let curve = &state.curve_log;
    let above_ok = curve
        .iter()
        .filter(|p| p.lambda > lambda_star)
        .all(|p| p.codevector_count == 1);
    let first_below = curve.iter().position(|p| p.lambda <= lambda_star);
    let split_at = curve.iter().position(|p| p.codevector_count >= 2);
    let (within_two, t_emp) = match (first_below, split_at) {
        (Some(b), Some(s)) => (s <= b + 1, curve[s].temperature),
        _ => (false, f64::NAN),
    };
    let ratio = t_emp / t_star;
    outcome(
        above_ok && within_two && (0.5..=2.0).contains(&ratio),
        format!(
            "lambda*={lambda_star:.4} (T*={t_star:.3}); first split at T={t_emp:.3} (ratio {ratio:.2}); \
             K=1 above lambda*: {above_ok}; split within two levels of crossing: {within_two}"
        ),
    )
}

/// Defaults with a merge threshold matched to the scale of the 2-D
/// benchmarks, where the default leaves many unseparated perturbation pairs.
fn benchmark_config() -> AnnealingConfig {
    AnnealingConfig {
        eps_merge: 3.0,
        ..Default::default()
    }
}

fn distortion_quality() -> Outcome {
    let spec = mix2d_four(4);
    let train: Vec<Vec<f64>> = sample_mixture(&spec, 20_000).unwrap().into_iter().map(|s| s.x).collect();
    let test: Vec<Vec<f64>> = spec.stream().skip(1_000_000).take(10_000).map(|s| s.x).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let state = oda::anneal_fit(
        spec.stream().map(|s| Sample::from(s.x)).take(2_000_000),
        benchmark_config(),
        EUCLID,
        &mut rng,
    )
    .unwrap();
    let ours = state.average_distortion(&test).unwrap();
    let k = state.len();
    let centers = lloyd(&train, k, 20, 4);
    let theirs = distortion(&centers, &test);
    let ratio = ours / theirs;
    outcome(
        ratio <= 1.2,
        format!(
            "K={k} at lambda={:.4}: distortion {ours:.5} vs Lloyd {theirs:.5} (ratio {ratio:.3})",
            state.lambda
        ),
    )
}

fn monotone_curves() -> Outcome {
    let spec = mix2d_four(5);
    let test: Vec<Vec<f64>> = spec.stream().skip(1_000_000).take(10_000).map(|s| s.x).collect();
    let stream = || spec.stream().map(|s| Sample::from(s.x)).take(2_000_000);
    let config = AnnealingConfig::default();
    let mut full = OdaState::new(config.clone(), EUCLID, Task::Clustering, 5).unwrap();
    full.fit(stream()).unwrap();
    // the same run stopped after its first level gives the codebook at λ_start
    let first_only = AnnealingConfig {
        lambda_min: config.lambda_start * (1.0 + config.gamma) / 2.0,
        ..config
    };
    let mut start = OdaState::new(first_only, EUCLID, Task::Clustering, 5).unwrap();
    start.fit(stream()).unwrap();
    let counts: Vec<usize> = full.curve_log.iter().map(|p| p.codevector_count).collect();
    let monotone = counts.windows(2).all(|w| w[1] >= w[0]);
    let d_start = start.average_distortion(&test).unwrap();
    let d_end = full.average_distortion(&test).unwrap();
    outcome(
        monotone && d_end <= d_start && start.curve_log.len() == 1,
        format!(
            "{} levels, counts non-decreasing: {monotone} (1 -> {}), distortion {d_start:.4} at lambda_start -> {d_end:.4} at lambda_min",
            counts.len(),
            counts.last().unwrap_or(&0)
        ),
    )
}

fn density_consistency() -> Outcome {
    let spec = mix1d_two(6);
    let truth = |x: f64| 0.5 * gaussian_pdf(x, -2.0, 0.5) + 0.5 * gaussian_pdf(x, 2.0, 0.5);
    let grid: Vec<f64> = (0..200).map(|i| -4.0 + 8.0 * (i as f64 + 0.5) / 200.0).collect();
    let mut errors = Vec::new();
    let mut ks = Vec::new();
    for n in [1_000usize, 10_000, 100_000] {
        let samples: Vec<Sample> = spec.stream().take(n).map(|s| Sample::from(s.x)).collect();
        let mut state = OdaState::new(AnnealingConfig::default(), EUCLID, Task::Clustering, 6).unwrap();
        state.fit(samples.clone()).unwrap();
        let total = state.recount_hits(&samples).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let volumes = state.cell_volumes(None, DEFAULT_VOLUME_SAMPLES, &mut rng).unwrap();
        let l1: f64 = grid
            .iter()
            .map(|&x| (state.density_at(&[x], total, &volumes).unwrap() - truth(x)).abs() * 8.0 / 200.0)
            .sum();
        errors.push(l1);
        ks.push(state.len());
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing,
        format!("L1 errors {errors:.4?} with K {ks:?} for n = 1e3, 1e4, 1e5"),
    )
}

fn classification() -> Outcome {
    let spec = class2d_two(8);
    let bayes = bayes_accuracy_2d([-1.0, -1.0], [1.0, 1.0], 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let stream = spec.stream().take(2_000_000).map(|s| match s.target {
        Target::Label(l) => (s.x, l),
        _ => unreachable!(),
    });
    let mut state = classify_fit(stream, benchmark_config(), EUCLID, &mut rng).unwrap();
    let train: Vec<Sample> = spec.stream().skip(3_000_000).take(20_000).collect();
    state.recount_hits(&train).unwrap();
    let density = ClassDensity::estimate(&state, None, DEFAULT_VOLUME_SAMPLES, &mut rng).unwrap();
    let priors = state.class_priors();
    let test: Vec<Sample> = spec.stream().skip(4_000_000).take(10_000).collect();
    let (mut bayes_ok, mut nn_ok) = (0usize, 0usize);
    for s in &test {
        let Target::Label(l) = s.target else { unreachable!() };
        bayes_ok += usize::from(state.bayes_predict(&density, &priors, &s.x).unwrap() == l);
        nn_ok += usize::from(state.nn_predict(&s.x).unwrap() == l);
    }
    let acc_b = bayes_ok as f64 / test.len() as f64;
    let acc_n = nn_ok as f64 / test.len() as f64;
    outcome(
        bayes - acc_b <= 0.05 && bayes - acc_n <= 0.08,
        format!(
            "Bayes {:.2}%, bayes_predict {:.2}%, nn_predict {:.2}% (K={})",
            100.0 * bayes,
            100.0 * acc_b,
            100.0 * acc_n,
            state.len()
        ),
    )
}

fn tree_config() -> AnnealingConfig {
    AnnealingConfig {
        max_iters_per_level: 5_000,
        ..Default::default()
    }
}

fn constant_regression() -> Outcome {
    let split = SplitCriterion {
        k_target: vec![2],
        lambda_stop: vec![0.1, 0.03, 0.01, 0.003],
        max_depth: 4,
        min_samples_to_split: 100,
    };
    let mut tree = Tree::new(TreeSpec::new(tree_config(), split, EUCLID, Task::ConstantRegression, 9)).unwrap();
    let sample = |i: u64| regression_sample(9, i, 0.0, std::f64::consts::TAU, f64::sin);
    tree.fit((0..20_000_000).map(sample)).unwrap();
    let test: Vec<Sample> = (50_000_000..50_020_000).map(sample).collect();
    let mse_at = |depth: usize| {
        test.iter()
            .map(|s| {
                let Target::Value(y) = s.target else { unreachable!() };
                (tree.predict_value_at_depth(&s.x, depth).unwrap() - y).powi(2)
            })
            .sum::<f64>()
            / test.len() as f64
    };
    let levels = tree.depth();
    let mses: Vec<f64> = (0..levels).map(mse_at).collect();
    let weakly_decreasing = mses.windows(2).all(|w| w[1] <= w[0] + 1e-9);

    // cell means over the test batch versus the leaf model values
    let mut sums: std::collections::BTreeMap<oda::tree::TreeCell, (f64, usize)> = Default::default();
    for s in &test {
        let Target::Value(y) = s.target else { unreachable!() };
        let e = sums.entry(tree.predict_cell(&s.x).unwrap()).or_default();
        e.0 += y;
        e.1 += 1;
    }
    let mut worst: f64 = 0.0;
    for (cell, (sum, count)) in &sums {
        if *count < 20 {
            continue;
        }
        let node = tree.node(&cell.path_id).unwrap();
        let Some(LocalModel::Constant { value, .. }) = &node.oda.codevectors[cell.index].model else {
            return outcome(false, "leaf without constant model".into());
        };
        worst = worst.max((value - sum / *count as f64).abs());
    }
    outcome(
        weakly_decreasing && worst <= 0.02 && levels == 4,
        format!(
            "{levels} levels, {} cells, test MSE per level {mses:.5?}; max |leaf value - cell mean| = {worst:.4} (bound 0.02, output range [-1, 1])",
            tree.cell_count()
        ),
    )
}

fn two_timescale() -> Outcome {
    let config = AnnealingConfig {
        lambda_min: 0.5,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let stream = piecewise_affine(10, 2_000_000).into_iter().map(|s| match s.target {
        Target::Value(y) => (s.x, y),
        _ => unreachable!(),
    });
    let state = two_timescale_fit(stream, config, TwoTimescaleStepsizes::default(), EUCLID, &mut rng).unwrap();
    let batch = piecewise_affine(11, 20_000);
    let mut per_cell: Vec<Vec<(f64, f64)>> = vec![Vec::new(); state.len()];
    for s in &batch {
        let Target::Value(y) = s.target else { unreachable!() };
        per_cell[state.predict_region(&s.x).unwrap()].push((s.x[0], y));
    }
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (cv, pts) in state.codevectors.iter().zip(&per_cell) {
        let (w_ols, b_ols) = ols_1d(pts);
        let Some(LocalModel::Affine { weights, offset }) = &cv.model else {
            return outcome(false, "cell without affine model".into());
        };
        let err = ((weights[0] - w_ols).powi(2) + (offset - b_ols).powi(2)).sqrt() / (w_ols.powi(2) + b_ols.powi(2)).sqrt();
        worst = worst.max(err);
        details.push(format!(
            "(w,b)=({:.4},{:.4}) vs OLS ({w_ols:.4},{b_ols:.4})",
            weights[0], offset
        ));
    }
    outcome(
        state.len() == 2 && worst <= 0.05,
        format!("K={}: {}; max relative error {worst:.4}", state.len(), details.join(", ")),
    )
}

fn tree_complexity() -> Outcome {
    let seed = 12;
    let spec = mix2d_four(seed);
    let test: Vec<Vec<f64>> = spec.stream().skip(50_000_000).take(10_000).map(|s| s.x).collect();

    let t0 = Instant::now();
    let flat_config = AnnealingConfig {
        k_max: 64,
        ..benchmark_config()
    };
    let mut flat = OdaState::new(flat_config, EUCLID, Task::Clustering, seed).unwrap();
    for s in spec.stream().take(20_000_000) {
        if flat.observe(Sample::from(s.x)).unwrap().terminated {
            break;
        }
    }
    let flat_time = t0.elapsed().as_secs_f64();

    let split = SplitCriterion {
        k_target: vec![4],
        lambda_stop: vec![0.3, 0.1, 0.01],
        max_depth: 3,
        min_samples_to_split: 100,
    };
    let t0 = Instant::now();
    let mut tree = Tree::new(TreeSpec::new(benchmark_config(), split, EUCLID, Task::Clustering, seed)).unwrap();
    let mut tree_time = None;
    for (i, s) in spec.stream().take(20_000_000).enumerate() {
        tree.update(Sample::from(s.x)).unwrap();
        if tree_time.is_none() && i % 100 == 0 && tree.cell_count() >= 64 {
            tree_time = Some(t0.elapsed().as_secs_f64());
        }
        if tree.is_complete() {
            break;
        }
    }
    let tree_time = tree_time.unwrap_or(f64::INFINITY);

    let d_flat = flat.average_distortion(&test).unwrap();
    let d_tree = tree.average_distortion(&test).unwrap();
    let rel = (d_tree - d_flat).abs() / d_flat;
    outcome(
        flat.len() >= 64 && tree_time < flat_time && rel <= 0.25,
        format!(
            "K=64 reached by flat in {flat_time:.3}s (K={}), by tree in {tree_time:.3}s (final K={}); \
             final distortion flat {d_flat:.4} vs tree {d_tree:.4} ({:.1}% apart)",
            flat.len(),
            tree.cell_count(),
            100.0 * rel
        ),
    )
}

fn classification_tree(pyramid: usize, seed: u64) -> Tree {
    let spec = class2d_two(seed);
    let split = SplitCriterion {
        k_target: vec![4, 8],
        max_depth: 2,
        ..Default::default()
    };
    let tree_spec = TreeSpec::new(tree_config(), split, EUCLID, Task::Classification, seed)
        .with_pyramid(ResolutionPyramid::new(pyramid));
    let mut tree = Tree::new(tree_spec).unwrap();
    tree.fit(spec.stream().take(3_000_000)).unwrap();
    tree
}

fn accuracy(tree: &Tree, test: &[Sample]) -> f64 {
    let ok = test
        .iter()
        .filter(|s| Target::Label(tree.predict_label(&s.x).unwrap()) == s.target)
        .count();
    ok as f64 / test.len() as f64
}

fn multiresolution() -> Outcome {
    let seed = 13;
    let test: Vec<Sample> = class2d_two(seed).stream().skip(10_000_000).take(10_000).collect();
    let single = classification_tree(0, seed);
    let multi = classification_tree(1, seed);
    let acc_single = accuracy(&single, &test);
    let acc_multi = accuracy(&multi, &test);
    let root_dim = multi.root.oda.dim().unwrap_or(0);

    let batch: Vec<Vec<f64>> = class2d_two(seed).stream().skip(20_000_000).take(20_000).map(|s| s.x).collect();
    let bounds = Bounds::from_points(batch.iter()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = multi.density(&batch, Some(&bounds), DEFAULT_VOLUME_SAMPLES, &mut rng).unwrap();
    let m = 100_000;
    let box_ = bounds.padded();
    let integral = (0..m)
        .map(|_| density.density_at(&multi, &box_.sample(&mut rng)).unwrap())
        .sum::<f64>()
        * box_.volume()
        / m as f64;
    let leaves_full_res = multi
        .nodes()
        .iter()
        .filter(|n| n.status != NodeStatus::Internal && !n.oda.is_empty() && n.level > 0)
        .all(|n| n.oda.dim() == Some(2));
    outcome(
        (acc_single - acc_multi).abs() <= 0.03 && (integral - 1.0).abs() <= 0.05 && root_dim == 1 && leaves_full_res,
        format!(
            "accuracy single-resolution {:.2}% vs pyramid {:.2}% (root dim {root_dim}, {} cells); leaf density integral {integral:.4}",
            100.0 * acc_single,
            100.0 * acc_multi,
            multi.cell_count()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let mut tree = classification_tree(1, 14);
        for p in &mut tree.curve_log {
            p.elapsed_seconds = 0.0;
        }
        let path = dir.path().join(name);
        write_curves(&path, &tree.curve_log).unwrap();
        (std::fs::read(path).unwrap(), tree)
    };
    let (a, tree) = run("a.csv");
    let (b, _) = run("b.csv");
    let identical = a == b && !a.is_empty();

    let probes: Vec<Vec<f64>> = class2d_two(15).stream().take(1000).map(|s| s.x).collect();
    let Model::Tree(back) = from_json(&to_json(&Model::Tree(tree.clone())).unwrap()).unwrap() else {
        return outcome(false, "tree snapshot came back as another kind".into());
    };
    let tree_same = probes
        .iter()
        .all(|x| back.predict_label(x).unwrap() == tree.predict_label(x).unwrap()
            && back.predict_cell(x).unwrap() == tree.predict_cell(x).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let flat = oda::anneal_fit(
        mix2d_four(14).stream().map(|s| Sample::from(s.x)).take(300_000),
        AnnealingConfig::default(),
        EUCLID,
        &mut rng,
    )
    .unwrap();
    let Model::Flat(flat_back) = from_json(&to_json(&Model::Flat(flat.clone())).unwrap()).unwrap() else {
        return outcome(false, "flat snapshot came back as another kind".into());
    };
    let flat_same = flat_back.codevectors == flat.codevectors
        && probes
            .iter()
            .all(|x| flat_back.predict_region(x).unwrap() == flat.predict_region(x).unwrap());
    outcome(
        identical && tree_same && flat_same,
        format!(
            "curves byte-identical: {identical} ({} rows); tree round trip: {tree_same}; flat round trip: {flat_same}",
            tree.curve_log.len()
        ),
    )
}
