//! Synthetic benchmarks, dataset files and curve files.
//!
//! Dataset files are comma separated. The first line is a header such as
//!
//! ```text
//! d=2,output=label,labels=setosa|virginica
//! ```
//!
//! followed by one observation per line: `d` coordinates, then the output
//! column when `output` is `value` or `label`. Labels are written either as
//! integers or, when a `labels=` vocabulary is present, by name.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{OdaError, Result};
use crate::oda::{CurvePoint, Label, Sample, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    /// Per-coordinate standard deviation.
    pub stddev: Vec<f64>,
    pub weight: f64,
    pub label: Option<Label>,
}

impl MixtureComponent {
    pub fn new(mean: Vec<f64>, stddev: Vec<f64>, weight: f64) -> Self {
        MixtureComponent {
            mean,
            stddev,
            weight,
            label: None,
        }
    }

    pub fn labelled(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

/// Diagonal Gaussian mixture. Sample `i` is a pure function of the spec, the
/// seed and `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.components.first() else {
            return Err(OdaError::config("mixture needs at least one component"));
        };
        let dim = first.mean.len();
        if dim == 0 {
            return Err(OdaError::config("mixture components need at least one coordinate"));
        }
        for c in &self.components {
            if c.mean.len() != dim || c.stddev.len() != dim {
                return Err(OdaError::DimensionMismatch {
                    expected: dim,
                    found: c.mean.len().max(c.stddev.len()),
                });
            }
            if !(c.weight > 0.0) || c.stddev.iter().any(|s| !(*s >= 0.0)) {
                return Err(OdaError::config("weights must be positive and stddevs non-negative"));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(OdaError::config(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn is_labelled(&self) -> bool {
        self.components.iter().all(|c| c.label.is_some())
    }

    /// Sample number `index` and its component index.
    pub fn sample_at(&self, index: u64) -> (Vec<f64>, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut which = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                which = i;
                break;
            }
        }
        let c = &self.components[which];
        let x = c
            .mean
            .iter()
            .zip(&c.stddev)
            .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (x, which)
    }

    /// Endless stream of samples `0, 1, 2, …`.
    pub fn stream(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..).map(move |i| {
            let (x, c) = self.sample_at(i);
            let target = self.components[c].label.map_or(Target::None, Target::Label);
            Sample::new(x, target)
        })
    }
}

/// The first `n` samples of the mixture.
pub fn sample_mixture(spec: &MixtureSpec, n: usize) -> Result<Vec<Sample>> {
    spec.validate()?;
    if n == 0 {
        return Err(OdaError::config("sample count must be at least 1"));
    }
    Ok(spec.stream().take(n).collect())
}

/// Two 1-D Gaussians at ±2 with standard deviation 0.5 and equal weights,
/// labelled 0 (left) and 1 (right).
pub fn mix1d_two(seed: u64) -> MixtureSpec {
    MixtureSpec {
        components: vec![
            MixtureComponent::new(vec![-2.0], vec![0.5], 0.5).labelled(0),
            MixtureComponent::new(vec![2.0], vec![0.5], 0.5).labelled(1),
        ],
        seed,
    }
}

/// Four 2-D Gaussians of unequal size and spread.
pub fn mix2d_four(seed: u64) -> MixtureSpec {
    MixtureSpec {
        components: vec![
            MixtureComponent::new(vec![-3.0, -2.0], vec![0.6, 0.6], 0.3),
            MixtureComponent::new(vec![2.5, -2.5], vec![0.5, 0.8], 0.25),
            MixtureComponent::new(vec![-2.0, 3.0], vec![0.8, 0.5], 0.25),
            MixtureComponent::new(vec![3.0, 2.5], vec![0.4, 0.4], 0.2),
        ],
        seed,
    }
}

/// Two overlapping 2-D classes with unit covariance at `(−1, −1)` and
/// `(1, 1)`.
pub fn class2d_two(seed: u64) -> MixtureSpec {
    MixtureSpec {
        components: vec![
            MixtureComponent::new(vec![-1.0, -1.0], vec![1.0, 1.0], 0.5).labelled(0),
            MixtureComponent::new(vec![1.0, 1.0], vec![1.0, 1.0], 0.5).labelled(1),
        ],
        seed,
    }
}

/// A dense cluster holding 80% of the mass and a sparse one holding 20%.
pub fn skew2d(seed: u64) -> MixtureSpec {
    MixtureSpec {
        components: vec![
            MixtureComponent::new(vec![-2.0, 0.0], vec![0.7, 0.7], 0.8),
            MixtureComponent::new(vec![2.0, 0.0], vec![0.7, 0.7], 0.2),
        ],
        seed,
    }
}

/// Uniform inputs on `[lo, hi)` paired with `f(x)`.
pub fn regression_sample(seed: u64, index: u64, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let x = rng.random_range(lo..hi);
    Sample::new(vec![x], Target::Value(f(x)))
}

/// `y = sin x` with `x` uniform on `[0, 2π)`.
pub fn sin1d(seed: u64, n: usize) -> Vec<Sample> {
    (0..n as u64)
        .map(|i| regression_sample(seed, i, 0.0, std::f64::consts::TAU, f64::sin))
        .collect()
}

/// The two-piece target `2x + 1` for `x < 0` and `1 − x` for `x ≥ 0`.
pub fn piecewise_affine_target(x: f64) -> f64 {
    if x < 0.0 {
        2.0 * x + 1.0
    } else {
        1.0 - x
    }
}

/// [`piecewise_affine_target`] with `x` uniform on `[−2, 2)`.
pub fn piecewise_affine(seed: u64, n: usize) -> Vec<Sample> {
    (0..n as u64)
        .map(|i| regression_sample(seed, i, -2.0, 2.0, piecewise_affine_target))
        .collect()
}

/// Named generators available to the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Mix1d,
    Mix2d,
    Class2d,
    Skew2d,
    Sin1d,
    PiecewiseAffine,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Mix1d,
        Benchmark::Mix2d,
        Benchmark::Class2d,
        Benchmark::Skew2d,
        Benchmark::Sin1d,
        Benchmark::PiecewiseAffine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Mix1d => "mix1d",
            Benchmark::Mix2d => "mix2d",
            Benchmark::Class2d => "class2d",
            Benchmark::Skew2d => "skew2d",
            Benchmark::Sin1d => "sin1d",
            Benchmark::PiecewiseAffine => "piecewise-affine",
        }
    }

    pub fn generate(self, n: usize, seed: u64) -> Result<Dataset> {
        let (output, rows) = match self {
            Benchmark::Mix1d => (OutputKind::None, unlabelled(sample_mixture(&mix1d_two(seed), n)?)),
            Benchmark::Mix2d => (OutputKind::None, sample_mixture(&mix2d_four(seed), n)?),
            Benchmark::Class2d => (OutputKind::Label, sample_mixture(&class2d_two(seed), n)?),
            Benchmark::Skew2d => (OutputKind::None, sample_mixture(&skew2d(seed), n)?),
            Benchmark::Sin1d => (OutputKind::Value, sin1d(seed, n)),
            Benchmark::PiecewiseAffine => (OutputKind::Value, piecewise_affine(seed, n)),
        };
        Ok(Dataset {
            header: DatasetHeader {
                dim: rows[0].x.len(),
                output,
                labels: Vec::new(),
            },
            rows,
        })
    }
}

fn unlabelled(rows: Vec<Sample>) -> Vec<Sample> {
    rows.into_iter().map(|s| Sample::from(s.x)).collect()
}

impl FromStr for Benchmark {
    type Err = OdaError;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Benchmark::ALL.iter().map(|b| b.name()).collect();
                OdaError::config(format!("unknown benchmark {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    None,
    Value,
    Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub dim: usize,
    pub output: OutputKind,
    /// Label names; index `i` is label `i`. Empty when labels are written
    /// as integers.
    pub labels: Vec<String>,
}

impl DatasetHeader {
    fn parse(fields: &csv::StringRecord) -> Result<Self> {
        let mut dim = None;
        let mut output = None;
        let mut labels = Vec::new();
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| OdaError::data(1, format!("header field {field:?} is not key=value")))?;
            match key.trim() {
                "d" => {
                    let d: usize = value
                        .trim()
                        .parse()
                        .map_err(|_| OdaError::data(1, format!("invalid dimension {value:?}")))?;
                    if d == 0 {
                        return Err(OdaError::data(1, "dimension must be at least 1"));
                    }
                    dim = Some(d);
                }
                "output" => {
                    output = Some(match value.trim() {
                        "none" => OutputKind::None,
                        "value" => OutputKind::Value,
                        "label" => OutputKind::Label,
                        other => return Err(OdaError::data(1, format!("unknown output kind {other:?}"))),
                    })
                }
                "labels" => labels = value.split('|').map(|l| l.trim().to_string()).collect(),
                other => return Err(OdaError::data(1, format!("unknown header key {other:?}"))),
            }
        }
        Ok(DatasetHeader {
            dim: dim.ok_or_else(|| OdaError::data(1, "header is missing d=<dimension>"))?,
            output: output.unwrap_or(OutputKind::None),
            labels,
        })
    }

    fn render(&self) -> String {
        let output = match self.output {
            OutputKind::None => "none",
            OutputKind::Value => "value",
            OutputKind::Label => "label",
        };
        let mut line = format!("d={},output={output}", self.dim);
        if !self.labels.is_empty() {
            line.push_str(",labels=");
            line.push_str(&self.labels.join("|"));
        }
        line
    }

    fn columns(&self) -> usize {
        self.dim + usize::from(self.output != OutputKind::None)
    }

    fn parse_label(&self, field: &str, line: usize) -> Result<Label> {
        if self.labels.is_empty() {
            field
                .trim()
                .parse()
                .map_err(|_| OdaError::data(line, format!("invalid label {field:?}")))
        } else {
            self.labels
                .iter()
                .position(|l| l == field.trim())
                .map(|i| i as Label)
                .ok_or_else(|| OdaError::data(line, format!("label {field:?} is not in the header vocabulary")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub rows: Vec<Sample>,
}

impl Dataset {
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|s| s.x.clone()).collect()
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset(File::open(path)?)
}

/// Parses a dataset; errors carry the 1-based line number.
pub fn parse_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => DatasetHeader::parse(&r.map_err(|e| OdaError::data(1, e.to_string()))?)?,
        None => return Err(OdaError::data(1, "missing header line")),
    };
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            OdaError::data(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.columns() {
            return Err(OdaError::data(
                line,
                format!("expected {} columns, found {}", header.columns(), record.len()),
            ));
        }
        let x = record
            .iter()
            .take(header.dim)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| OdaError::data(line, format!("invalid number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let target = match header.output {
            OutputKind::None => Target::None,
            OutputKind::Value => {
                let f = &record[header.dim];
                Target::Value(
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| OdaError::data(line, format!("invalid output {f:?}")))?,
                )
            }
            OutputKind::Label => Target::Label(header.parse_label(&record[header.dim], line)?),
        };
        rows.push(Sample::new(x, target));
    }
    if rows.is_empty() {
        return Err(OdaError::data(2, "dataset has no observations"));
    }
    Ok(Dataset { header, rows })
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "{}", dataset.header.render())?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in &dataset.rows {
        let mut fields: Vec<String> = row.x.iter().map(|v| v.to_string()).collect();
        match row.target {
            Target::None => {}
            Target::Value(y) => fields.push(y.to_string()),
            Target::Label(l) => fields.push(match dataset.header.labels.get(l as usize) {
                Some(name) => name.clone(),
                None => l.to_string(),
            }),
        }
        writer.write_record(&fields).map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

pub const CURVE_COLUMNS: [&str; 6] = ["lambda", "temperature", "metric", "codevectors", "samples", "seconds"];

/// One row per completed temperature level.
pub fn write_curves(path: impl AsRef<Path>, curve: &[CurvePoint]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_io)?;
    writer.write_record(CURVE_COLUMNS).map_err(csv_io)?;
    for p in curve {
        writer
            .write_record([
                p.lambda.to_string(),
                p.temperature.to_string(),
                p.metric.to_string(),
                p.codevector_count.to_string(),
                p.samples_observed.to_string(),
                p.elapsed_seconds.to_string(),
            ])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_curves(path: impl AsRef<Path>) -> Result<Vec<CurvePoint>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_io)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| OdaError::data(line, e.to_string()))?;
        if record.len() != CURVE_COLUMNS.len() {
            return Err(OdaError::data(line, "wrong number of curve columns"));
        }
        let num = |j: usize| -> Result<f64> {
            record[j]
                .parse()
                .map_err(|_| OdaError::data(line, format!("invalid {} {:?}", CURVE_COLUMNS[j], &record[j])))
        };
        out.push(CurvePoint {
            lambda: num(0)?,
            temperature: num(1)?,
            metric: num(2)?,
            codevector_count: num(3)? as usize,
            samples_observed: num(4)? as u64,
            elapsed_seconds: num(5)?,
        });
    }
    Ok(out)
}

fn csv_io(e: csv::Error) -> OdaError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => OdaError::Io(io),
        other => OdaError::data(0, format!("{other:?}")),
    }
}
