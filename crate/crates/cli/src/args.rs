use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oda::local_models::TwoTimescaleStepsizes;
use oda::tree::SplitCriterion;
use oda::{AnnealingConfig, DivergenceKind, Perturbation};

#[derive(Debug, Parser)]
#[command(name = "oda", version, about = "Online deterministic annealing for clustering, classification and regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic benchmark dataset.
    GenData(GenDataArgs),
    /// Learn a codebook from unlabelled observations.
    TrainCluster(TrainArgs),
    /// Learn a labelled codebook from `output=label` data.
    TrainClassify(ClassifyArgs),
    /// Learn a partition with local models from `output=value` data.
    TrainRegress(RegressArgs),
    /// Apply a saved model to every row of a dataset.
    Predict(PredictArgs),
    /// Export the performance curve stored in a saved model.
    Curves(CurvesArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// mix1d, mix2d, class2d, skew2d, sin1d or piecewise-affine.
    #[arg(long)]
    pub benchmark: String,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Divergence {
    SquaredEuclidean,
    GeneralizedKl,
}

impl From<Divergence> for DivergenceKind {
    fn from(d: Divergence) -> Self {
        match d {
            Divergence::SquaredEuclidean => DivergenceKind::SquaredEuclidean,
            Divergence::GeneralizedKl => DivergenceKind::GeneralizedKl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationKind {
    Relative,
    Absolute,
}

/// Flags shared by every training subcommand. Unset numeric flags take the
/// library defaults.
#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Model snapshot to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Curve file to write (one row per temperature level).
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Divergence::SquaredEuclidean)]
    pub divergence: Divergence,
    /// Passes over the dataset fed to the streaming learner.
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    /// Write zero in the seconds column so that reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,

    /// Train a tree of learners instead of a single codebook.
    #[arg(long)]
    pub tree: bool,
    /// Resolution pyramid depth; the root trains on the coarsest level.
    #[arg(long, requires = "tree")]
    pub multires: Option<usize>,
    /// Train the tree offline on the whole dataset with this many threads.
    #[arg(long, requires = "tree")]
    pub workers: Option<usize>,

    #[command(flatten)]
    pub annealing: AnnealingFlags,
    #[command(flatten)]
    pub split: SplitFlags,
}

#[derive(Debug, Args)]
pub struct AnnealingFlags {
    /// Initial temperature coefficient in (0, 1) [default: 0.99].
    #[arg(long)]
    pub lambda_start: Option<f64>,
    /// Cooling factor [default: 0.9].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Final temperature coefficient [default: 0.01].
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// [default: 1e-4]
    #[arg(long)]
    pub eps_converge: Option<f64>,
    /// [default: 1e-2]
    #[arg(long)]
    pub eps_merge: Option<f64>,
    /// [default: 1e-4]
    #[arg(long)]
    pub eps_idle: Option<f64>,
    /// [default: relative]
    #[arg(long, value_enum)]
    pub perturbation: Option<PerturbationKind>,
    /// Relative perturbation size in standard deviations [default: 0.01].
    #[arg(long)]
    pub perturbation_factor: Option<f64>,
    /// Observations used to estimate the spread [default: 100].
    #[arg(long)]
    pub perturbation_warmup: Option<usize>,
    /// Absolute perturbation size [default: 0.01].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stepsize offset `a` in 1/(a + b n) [default: 1].
    #[arg(long)]
    pub stepsize_a: Option<f64>,
    /// Stepsize slope `b` in 1/(a + b n) [default: 0.5].
    #[arg(long)]
    pub stepsize_b: Option<f64>,
    /// [default: 128]
    #[arg(long)]
    pub k_max: Option<usize>,
    /// [default: 20000]
    #[arg(long)]
    pub max_iters_per_level: Option<u64>,
    /// [default: 200]
    #[arg(long)]
    pub convergence_window: Option<u64>,
}

impl AnnealingFlags {
    pub fn config(&self) -> AnnealingConfig {
        let d = AnnealingConfig::default();
        let (d_factor, d_warmup) = match d.perturbation {
            Perturbation::Relative { factor, warmup } => (factor, warmup),
            Perturbation::Absolute { .. } => (0.01, 100),
        };
        // --delta alone implies an absolute perturbation
        let absolute = match self.perturbation {
            Some(kind) => kind == PerturbationKind::Absolute,
            None => self.delta.is_some(),
        };
        let perturbation = match absolute {
            true => Perturbation::Absolute {
                delta: self.delta.unwrap_or(0.01),
            },
            false => Perturbation::Relative {
                factor: self.perturbation_factor.unwrap_or(d_factor),
                warmup: self.perturbation_warmup.unwrap_or(d_warmup),
            },
        };
        AnnealingConfig {
            lambda_start: self.lambda_start.unwrap_or(d.lambda_start),
            gamma: self.gamma.unwrap_or(d.gamma),
            lambda_min: self.lambda_min.unwrap_or(d.lambda_min),
            eps_converge: self.eps_converge.unwrap_or(d.eps_converge),
            eps_merge: self.eps_merge.unwrap_or(d.eps_merge),
            eps_idle: self.eps_idle.unwrap_or(d.eps_idle),
            perturbation,
            stepsize_a: self.stepsize_a.unwrap_or(d.stepsize_a),
            stepsize_b: self.stepsize_b.unwrap_or(d.stepsize_b),
            k_max: self.k_max.unwrap_or(d.k_max),
            max_iters_per_level: self.max_iters_per_level.unwrap_or(d.max_iters_per_level),
            convergence_window: self.convergence_window.unwrap_or(d.convergence_window),
        }
    }
}

#[derive(Debug, Args)]
pub struct SplitFlags {
    /// Codevectors per node, per tree level; the last entry repeats [default: 4].
    #[arg(long, value_delimiter = ',')]
    pub k_target: Option<Vec<usize>>,
    /// Final temperature coefficient per tree level [default: 0.3,0.1,0.01].
    #[arg(long, value_delimiter = ',')]
    pub lambda_stop: Option<Vec<f64>>,
    /// [default: 3]
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// [default: 100]
    #[arg(long)]
    pub min_samples_to_split: Option<u64>,
}

impl SplitFlags {
    pub fn criterion(&self) -> SplitCriterion {
        let d = SplitCriterion::default();
        SplitCriterion {
            k_target: self.k_target.clone().unwrap_or(d.k_target),
            lambda_stop: self.lambda_stop.clone().unwrap_or(d.lambda_stop),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            min_samples_to_split: self.min_samples_to_split.unwrap_or(d.min_samples_to_split),
        }
    }

    pub fn any_set(&self) -> bool {
        self.k_target.is_some() || self.lambda_stop.is_some() || self.max_depth.is_some() || self.min_samples_to_split.is_some()
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LocalModelArg {
    Constant,
    Affine,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, value_enum, default_value_t = LocalModelArg::Constant)]
    pub model: LocalModelArg,
    /// Affine model stepsize offset in 1/(a + b n^p) [default: 1].
    #[arg(long)]
    pub beta_a: Option<f64>,
    /// [default: 0.5]
    #[arg(long)]
    pub beta_b: Option<f64>,
    /// Exponent `p` of the affine model stepsize [default: 0.6].
    #[arg(long)]
    pub beta_exponent: Option<f64>,
}

impl RegressArgs {
    pub fn stepsizes(&self, config: &AnnealingConfig) -> TwoTimescaleStepsizes {
        let d = TwoTimescaleStepsizes::default();
        TwoTimescaleStepsizes {
            alpha_a: config.stepsize_a,
            alpha_b: config.stepsize_b,
            beta_a: self.beta_a.unwrap_or(d.beta_a),
            beta_b: self.beta_b.unwrap_or(d.beta_b),
            exponent: self.beta_exponent.unwrap_or(d.exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// Label of the nearest codevector.
    Nearest,
    /// Bayes rule on the estimated class-conditional densities.
    Bayes,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Decision rule for flat classification models.
    #[arg(long, value_enum, default_value_t = Rule::Nearest)]
    pub rule: Rule,
    /// Seed of the Monte Carlo volume estimate used by `--rule bayes`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_timing: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(extra: &[&str]) -> TrainArgs {
        let mut argv = vec!["oda", "train-cluster", "--input", "in.csv", "--out", "m.oda"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::TrainCluster(args) => args,
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn unset_flags_give_library_defaults() {
        let args = parse(&[]);
        assert_eq!(args.annealing.config(), AnnealingConfig::default());
        assert_eq!(args.split.criterion(), SplitCriterion::default());
        assert!(!args.split.any_set());
    }

    #[test]
    fn every_config_field_has_a_flag() {
        let args = parse(&[
            "--lambda-start", "0.95", "--gamma", "0.8", "--lambda-min", "0.05", "--eps-converge", "1e-3",
            "--eps-merge", "0.5", "--eps-idle", "1e-5", "--stepsize-a", "2", "--stepsize-b", "0.25", "--k-max",
            "12", "--max-iters-per-level", "300", "--convergence-window", "50", "--perturbation-factor", "0.1",
            "--perturbation-warmup", "20",
        ]);
        let expected = AnnealingConfig {
            lambda_start: 0.95,
            gamma: 0.8,
            lambda_min: 0.05,
            eps_converge: 1e-3,
            eps_merge: 0.5,
            eps_idle: 1e-5,
            perturbation: Perturbation::Relative {
                factor: 0.1,
                warmup: 20,
            },
            stepsize_a: 2.0,
            stepsize_b: 0.25,
            k_max: 12,
            max_iters_per_level: 300,
            convergence_window: 50,
        };
        assert_eq!(args.annealing.config(), expected);

        let args = parse(&["--tree", "--k-target", "4,8", "--lambda-stop", "0.2,0.02", "--max-depth", "2", "--min-samples-to-split", "7"]);
        let split = SplitCriterion {
            k_target: vec![4, 8],
            lambda_stop: vec![0.2, 0.02],
            max_depth: 2,
            min_samples_to_split: 7,
        };
        assert_eq!(args.split.criterion(), split);
    }

    #[test]
    fn delta_alone_selects_absolute_perturbation() {
        let args = parse(&["--delta", "0.3"]);
        assert_eq!(args.annealing.config().perturbation, Perturbation::Absolute { delta: 0.3 });
    }

    #[test]
    fn multires_and_workers_need_tree() {
        for flag in ["--multires", "--workers"] {
            let argv = ["oda", "train-cluster", "--input", "a", "--out", "b", flag, "2"];
            assert!(Cli::try_parse_from(argv).is_err(), "{flag}");
        }
    }
}
