//! Tabular reaction-condition data: ingestion, validation, seeded train/test
//! splitting and z-score input standardization.
//!
//! The library layer works on any number of input features `d >= 1`; the
//! reaction schema (`time_h,temperature_c,enzyme_mg,molar_ratio,yield_pct`)
//! is the default used by the CLI and adds the per-sample domain checks.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Column labels of the reaction-condition CSV, inputs first, yield last.
pub const REACTION_COLUMNS: [&str; 5] = [
    "time_h",
    "temperature_c",
    "enzyme_mg",
    "molar_ratio",
    "yield_pct",
];

/// One reaction record: four conditions and the isolated yield in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time_h: f64,
    pub temperature_c: f64,
    pub enzyme_mg: f64,
    pub molar_ratio: f64,
    pub yield_pct: f64,
}

impl Sample {
    pub fn features(&self) -> [f64; 4] {
        [
            self.time_h,
            self.temperature_c,
            self.enzyme_mg,
            self.molar_ratio,
        ]
    }

    /// Checks the domain invariants, returning a human-readable reason on failure.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let named = [
            ("time_h", self.time_h),
            ("temperature_c", self.temperature_c),
            ("enzyme_mg", self.enzyme_mg),
            ("molar_ratio", self.molar_ratio),
            ("yield_pct", self.yield_pct),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(format!("{name} is not finite ({v})"));
            }
        }
        if self.time_h < 0.0 {
            return Err(format!("time_h must be >= 0, got {}", self.time_h));
        }
        if self.enzyme_mg < 0.0 {
            return Err(format!("enzyme_mg must be >= 0, got {}", self.enzyme_mg));
        }
        if self.molar_ratio <= 0.0 {
            return Err(format!("molar_ratio must be > 0, got {}", self.molar_ratio));
        }
        Ok(())
    }
}

/// Expected CSV layout: every column but the last is an input feature, the
/// last is the regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    columns: Vec<String>,
    reaction_checks: bool,
}

impl Schema {
    /// The reaction-condition schema, with [`Sample`] invariants enforced per row.
    pub fn reaction() -> Self {
        Schema {
            columns: REACTION_COLUMNS.iter().map(|s| s.to_string()).collect(),
            reaction_checks: true,
        }
    }

    /// Any header; only finiteness is checked. Needs at least one input and the target.
    pub fn generic<S: AsRef<str>>(columns: &[S]) -> Result<Self> {
        if columns.len() < 2 {
            return Err(Error::InvalidParameter(
                "a schema needs at least one feature column and a target column".into(),
            ));
        }
        Ok(Schema {
            columns: columns.iter().map(|s| s.as_ref().to_string()).collect(),
            reaction_checks: false,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }
}

/// An ordered collection of records sharing one feature layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    target_name: String,
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
    source: String,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        features: Vec<Vec<f64>>,
        targets: Vec<f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::InvalidParameter("at least one feature is required".into()));
        }
        if features.len() != targets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} feature rows but {} targets",
                features.len(),
                targets.len()
            )));
        }
        for (i, (row, y)) in features.iter().zip(&targets).enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if !y.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    reason: "non-finite value".into(),
                });
            }
        }
        Ok(Dataset {
            feature_names,
            target_name: target_name.into(),
            features,
            targets,
            source: source.into(),
        })
    }

    /// Builds a reaction dataset, validating every sample.
    pub fn from_samples(samples: &[Sample], source: impl Into<String>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            s.validate()
                .map_err(|reason| Error::InvalidRow { row: i + 1, reason })?;
        }
        Dataset::new(
            REACTION_COLUMNS[..4].iter().map(|s| s.to_string()).collect(),
            REACTION_COLUMNS[4],
            samples.iter().map(|s| s.features().to_vec()).collect(),
            samples.iter().map(|s| s.yield_pct).collect(),
            source,
        )
    }

    /// Convenience constructor with generated feature names `x1..xd`.
    pub fn from_rows(features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let d = features.first().map_or(1, Vec::len);
        let names = (1..=d).map(|i| format!("x{i}")).collect();
        Dataset::new(names, "y", features, targets, "in-memory")
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.features[i], self.targets[i])
    }

    /// Reaction samples, if this dataset uses the four-feature reaction layout.
    pub fn samples(&self) -> Option<Vec<Sample>> {
        if self.dim() != 4 {
            return None;
        }
        Some(
            self.features
                .iter()
                .zip(&self.targets)
                .map(|(x, &y)| Sample {
                    time_h: x[0],
                    temperature_c: x[1],
                    enzyme_mg: x[2],
                    molar_ratio: x[3],
                    yield_pct: y,
                })
                .collect(),
        )
    }

    /// New dataset holding the given rows, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            source: self.source.clone(),
        }
    }

    /// Same rows with the targets replaced.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Dataset> {
        Dataset::new(
            self.feature_names.clone(),
            self.target_name.clone(),
            self.features.clone(),
            targets,
            self.source.clone(),
        )
    }

    /// Renders the dataset as CSV text (header plus one line per record).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.feature_names.join(","));
        out.push(',');
        out.push_str(&self.target_name);
        out.push('\n');
        for (x, y) in self.features.iter().zip(&self.targets) {
            for v in x {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{y}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a CSV file whose header must equal `schema` exactly, in order.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema, &path.display().to_string())
}

/// Parses CSV text with the same rules as [`load_csv`].
pub fn parse_csv(text: &str, schema: &Schema, source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != schema.columns {
        return Err(Error::HeaderMismatch {
            expected: schema.columns.join(","),
            found: header.join(","),
        });
    }

    let width = schema.columns.len();
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != width {
            return Err(Error::InvalidRow {
                row,
                reason: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(width);
        for (cell, column) in record.iter().zip(&schema.columns) {
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                row,
                column: column.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("{column} is not finite ({cell})"),
                });
            }
            values.push(v);
        }
        if schema.reaction_checks {
            let s = Sample {
                time_h: values[0],
                temperature_c: values[1],
                enzyme_mg: values[2],
                molar_ratio: values[3],
                yield_pct: values[4],
            };
            s.validate().map_err(|reason| Error::InvalidRow { row, reason })?;
        }
        targets.push(values.pop().expect("width >= 2"));
        features.push(values);
    }

    Dataset::new(
        schema.columns[..width - 1].to_vec(),
        schema.columns[width - 1].clone(),
        features,
        targets,
        source,
    )
}

/// Train fraction and shuffle seed for a train/test partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.65,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Row indices of a partition, each list in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions `0..n`: a seeded uniform shuffle, the first `round(f * n)`
/// indices go to train and the rest to test.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: n });
    }
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidParameter(format!(
            "train fraction {} leaves an empty partition for {n} samples",
            spec.train_fraction
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let s = split_indices(ds.len(), spec)?;
    Ok((ds.subset(&s.train), ds.subset(&s.test)))
}

/// Per-feature z-score standardization. Deviations use the population
/// convention (divide by n).
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Normalizer {
    /// Fits on `train` only; a constant feature is an error naming the feature.
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, found: 0 });
        }
        let n = train.len() as f64;
        let d = train.dim();
        let mut mean = vec![0.0; d];
        for x in train.features() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in train.features() {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        for (k, s) in std.iter().enumerate() {
            // relative floor: anything below is rounding noise around a constant
            let scale = mean[k].abs().max(1.0);
            if !(*s > scale * 1e-12) {
                return Err(Error::ZeroVariance(train.feature_names()[k].clone()));
            }
        }
        Ok(Normalizer { mean, std })
    }

    /// Pass-through normalizer for inputs that are already standardized.
    pub fn identity(dim: usize) -> Self {
        Normalizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(Error::InvalidParameter(
                "normalizer needs equal, nonzero numbers of means and deviations".into(),
            ));
        }
        if mean.iter().any(|m| !m.is_finite()) || std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter(
                "normalizer means must be finite and deviations finite and positive".into(),
            ));
        }
        Ok(Normalizer { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn inverse_transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        Ok(z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| v * s + m)
            .collect())
    }

    /// Standardizes every row of `ds`.
    pub fn transform_all(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        ds.features().iter().map(|x| self.transform(x)).collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

pub fn fit_normalizer(train: &Dataset) -> Result<Normalizer> {
    Normalizer::fit(train)
}
