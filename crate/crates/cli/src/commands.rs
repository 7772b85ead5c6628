use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use oda::classify::ClassDensity;
use oda::data::{read_dataset, write_curves, write_dataset, Benchmark, Dataset, OutputKind};
use oda::density::DEFAULT_VOLUME_SAMPLES;
use oda::multires::ResolutionPyramid;
use oda::snapshot::{load_model, save_model, Model};
use oda::tree::{Tree, TreeSpec};
use oda::{CurvePoint, OdaError, OdaState, Result, Sample, Target, Task};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{
    Cli, Command, CurvesArgs, GenDataArgs, LocalModelArg, PredictArgs, RegressArgs, Rule, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(args) => gen_data(args),
        Command::TrainCluster(args) => train(&args, Task::Clustering, None),
        Command::TrainClassify(args) => train(&args.train, Task::Classification, Some(OutputKind::Label)),
        Command::TrainRegress(args) => {
            let task = regression_task(&args);
            train(&args.train, task, Some(OutputKind::Value))
        }
        Command::Predict(args) => predict(args),
        Command::Curves(args) => curves(args),
    }
}

fn regression_task(args: &RegressArgs) -> Task {
    match args.model {
        LocalModelArg::Constant => Task::ConstantRegression,
        LocalModelArg::Affine => Task::AffineRegression {
            stepsizes: args.stepsizes(&args.train.annealing.config()),
        },
    }
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let benchmark: Benchmark = args.benchmark.parse()?;
    let dataset = benchmark.generate(args.n, args.seed)?;
    write_dataset(&args.out, &dataset).map_err(at(&args.out))
}

/// Prefixes I/O errors with the file they concern.
fn at(path: &Path) -> impl FnOnce(OdaError) -> OdaError + '_ {
    move |e| match e {
        OdaError::Io(io) => OdaError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn usage(msg: impl Into<String>) -> OdaError {
    OdaError::InvalidConfig(msg.into())
}

fn train(args: &TrainArgs, task: Task, needs: Option<OutputKind>) -> Result<()> {
    if !args.tree && args.split.any_set() {
        return Err(usage("tree split flags need --tree"));
    }
    if args.passes == 0 {
        return Err(usage("--passes must be at least 1"));
    }
    let mut config = args.annealing.config();
    if let Task::AffineRegression { stepsizes } = &task {
        stepsizes.validate()?;
        config.stepsize_a = stepsizes.alpha_a;
        config.stepsize_b = stepsizes.alpha_b;
    }

    let dataset = read_dataset(&args.input).map_err(at(&args.input))?;
    let rows = training_rows(&dataset, needs)?;
    let stream = || rows.iter().cycle().take(rows.len() * args.passes).cloned();

    let mut model = if args.tree {
        let mut spec = TreeSpec::new(config, args.split.criterion(), args.divergence.into(), task, args.seed);
        if let Some(depth) = args.multires {
            spec = spec.with_pyramid(ResolutionPyramid::new(depth));
        }
        let tree = match args.workers {
            Some(workers) => Tree::fit_offline(spec, &rows, workers)?,
            None => {
                let mut tree = Tree::new(spec)?;
                tree.fit(stream())?;
                tree
            }
        };
        Model::Tree(tree)
    } else {
        let mut state = OdaState::new(config, args.divergence.into(), task, args.seed)?;
        state.fit(stream())?;
        if state.task == Task::Classification {
            // hit counts over the whole training set feed the Bayes rule
            state.recount_hits(&rows)?;
        }
        Model::Flat(state)
    };

    if args.no_timing {
        zero_timing(&mut model);
    }
    save_model(&args.out, &model).map_err(at(&args.out))?;
    if let Some(path) = &args.curves {
        write_curves(path, model.curve_log()).map_err(at(path))?;
    }
    summarize(&model);
    Ok(())
}

fn training_rows(dataset: &Dataset, needs: Option<OutputKind>) -> Result<Vec<Sample>> {
    match needs {
        None => Ok(dataset.rows.iter().map(|s| Sample::from(s.x.clone())).collect()),
        Some(kind) if kind == dataset.header.output => Ok(dataset.rows.clone()),
        Some(kind) => Err(OdaError::Data {
            line: 1,
            message: format!("this command needs output={}", output_name(kind)),
        }),
    }
}

fn output_name(kind: OutputKind) -> &'static str {
    match kind {
        OutputKind::None => "none",
        OutputKind::Value => "value",
        OutputKind::Label => "label",
    }
}

fn zero_timing(model: &mut Model) {
    let log: &mut Vec<CurvePoint> = match model {
        Model::Flat(s) => &mut s.curve_log,
        Model::Tree(t) => &mut t.curve_log,
    };
    for p in log {
        p.elapsed_seconds = 0.0;
    }
    if let Model::Tree(t) = model {
        for node in nodes_mut(&mut t.root) {
            for p in &mut node.curve_log {
                p.elapsed_seconds = 0.0;
            }
        }
    }
}

fn nodes_mut(node: &mut oda::tree::TreeNode) -> Vec<&mut OdaState> {
    let mut out = vec![&mut node.oda];
    for child in &mut node.children {
        out.extend(nodes_mut(child));
    }
    out
}

fn summarize(model: &Model) {
    match model {
        Model::Flat(s) => eprintln!(
            "{}: {} codevectors, {} observations, stopped on {:?}",
            s.task.name(),
            s.len(),
            s.samples_seen,
            s.stop_reason()
        ),
        Model::Tree(t) => eprintln!(
            "{} tree: {} cells, depth {}, {} observations",
            t.spec.task.name(),
            t.cell_count(),
            t.depth(),
            t.samples_seen
        ),
    }
}

enum Prediction {
    Cell(String),
    Value(f64),
    Label(u32),
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model).map_err(at(&args.model))?;
    let dataset = read_dataset(&args.input).map_err(at(&args.input))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let bayes = match (&model, args.rule) {
        (_, Rule::Nearest) => None,
        (Model::Flat(s), Rule::Bayes) if s.task == Task::Classification => {
            Some(ClassDensity::estimate(s, None, DEFAULT_VOLUME_SAMPLES, &mut rng)?)
        }
        _ => return Err(usage("--rule bayes needs a flat classification model")),
    };

    let predict_one = |x: &[f64]| -> Result<Prediction> {
        Ok(match &model {
            Model::Flat(s) => match &s.task {
                Task::Clustering => Prediction::Cell(s.predict_region(x)?.to_string()),
                Task::Classification => match &bayes {
                    Some(density) => Prediction::Label(s.bayes_predict(density, &s.class_priors(), x)?),
                    None => Prediction::Label(s.nn_predict(x)?),
                },
                Task::ConstantRegression | Task::AffineRegression { .. } => Prediction::Value(s.predict_value(x)?),
            },
            Model::Tree(t) => match &t.spec.task {
                Task::Clustering => Prediction::Cell(t.predict_cell(x)?.to_string()),
                Task::Classification => Prediction::Label(t.predict_label(x)?),
                Task::ConstantRegression | Task::AffineRegression { .. } => Prediction::Value(t.predict_value(x)?),
            },
        })
    };

    let mut out = BufWriter::new(File::create(&args.out).map_err(|e| at(&args.out)(e.into()))?);
    writeln!(out, "prediction")?;
    let mut correct = 0usize;
    let mut squared_error = 0.0;
    for row in &dataset.rows {
        let p = predict_one(&row.x)?;
        match (&p, row.target) {
            (Prediction::Label(l), Target::Label(truth)) => correct += usize::from(*l == truth),
            (Prediction::Value(v), Target::Value(y)) => squared_error += (v - y).powi(2),
            _ => {}
        }
        match p {
            Prediction::Cell(c) => writeln!(out, "{c}")?,
            Prediction::Value(v) => writeln!(out, "{v}")?,
            Prediction::Label(l) => match dataset.header.labels.get(l as usize) {
                Some(name) => writeln!(out, "{name}")?,
                None => writeln!(out, "{l}")?,
            },
        }
    }
    out.flush()?;

    let n = dataset.rows.len() as f64;
    match (model.task(), dataset.header.output) {
        (Task::Classification, OutputKind::Label) => eprintln!("accuracy {:.4} on {} rows", correct as f64 / n, n),
        (Task::ConstantRegression | Task::AffineRegression { .. }, OutputKind::Value) => {
            eprintln!("mse {:.6} on {} rows", squared_error / n, n)
        }
        _ => eprintln!("{n} predictions"),
    }
    Ok(())
}

fn curves(args: CurvesArgs) -> Result<()> {
    let mut model = load_model(&args.model).map_err(at(&args.model))?;
    if args.no_timing {
        zero_timing(&mut model);
    }
    write_curves(&args.out, model.curve_log()).map_err(at(&args.out))
}
