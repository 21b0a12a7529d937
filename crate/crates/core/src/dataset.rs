//! The immutable dataset value and its ingestion/manipulation utilities.
//!
//! A [`DataSet`] is an `n x d` matrix of finite reals plus optional
//! per-observation [`Targets`], feature names and observation ids. No
//! operation mutates its input; everything returns a fresh dataset.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Formats a real with 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    ClassLabels,
    Regression,
    Scores,
}

/// Integer class labels drawn from a declared, sorted label set.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassLabels {
    labels: Vec<i64>,
    label_set: Vec<i64>,
    names: BTreeMap<i64, String>,
}

impl ClassLabels {
    /// Builds labels over `label_set`. The set is sorted and deduplicated; it
    /// must be non-empty and contain every label.
    pub fn new(labels: Vec<i64>, mut label_set: Vec<i64>) -> Result<Self> {
        label_set.sort_unstable();
        label_set.dedup();
        if label_set.is_empty() {
            return Err(Error::InvalidLabels("label set is empty".into()));
        }
        if let Some(bad) = labels.iter().find(|l| label_set.binary_search(l).is_err()) {
            return Err(Error::InvalidLabels(format!("label {bad} is not in the declared label set")));
        }
        Ok(Self { labels, label_set, names: BTreeMap::new() })
    }

    /// Labels with the label set inferred from the values present.
    pub fn from_labels(labels: Vec<i64>) -> Result<Self> {
        let set = labels.clone();
        Self::new(labels, set)
    }

    pub fn with_names(mut self, names: BTreeMap<i64, String>) -> Result<Self> {
        if let Some(bad) = names.keys().find(|l| self.label_set.binary_search(l).is_err()) {
            return Err(Error::InvalidLabels(format!("name given for label {bad} outside the label set")));
        }
        self.names = names;
        Ok(self)
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn label_set(&self) -> &[i64] {
        &self.label_set
    }

    pub fn names(&self) -> &BTreeMap<i64, String> {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Display name of a label, falling back to its integer value.
    pub fn name(&self, label: i64) -> String {
        self.names.get(&label).cloned().unwrap_or_else(|| label.to_string())
    }

    /// Finds a label by class name, or by its integer spelling.
    pub fn resolve(&self, query: &str) -> Option<i64> {
        if let Some((&l, _)) = self.names.iter().find(|(_, n)| n.as_str() == query) {
            return Some(l);
        }
        query.trim().parse::<i64>().ok().filter(|l| self.label_set.binary_search(l).is_ok())
    }

    /// Observation count per label, including labels with no observations.
    pub fn counts(&self) -> BTreeMap<i64, usize> {
        let mut counts: BTreeMap<i64, usize> = self.label_set.iter().map(|&l| (l, 0)).collect();
        for l in &self.labels {
            *counts.get_mut(l).expect("label validated against set") += 1;
        }
        counts
    }

    fn select(&self, rows: &[usize]) -> Self {
        Self {
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            label_set: self.label_set.clone(),
            names: self.names.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Classes(ClassLabels),
    Regression(Vec<f64>),
    Scores(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Regression(v) | Targets::Scores(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            Targets::Classes(_) => TargetKind::ClassLabels,
            Targets::Regression(_) => TargetKind::Regression,
            Targets::Scores(_) => TargetKind::Scores,
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            Targets::Classes(c) => Targets::Classes(c.select(rows)),
            Targets::Regression(v) => Targets::Regression(rows.iter().map(|&i| v[i]).collect()),
            Targets::Scores(v) => Targets::Scores(rows.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Text form of observation `i`'s target, as written to CSV.
    pub fn cell(&self, i: usize) -> String {
        match self {
            Targets::Classes(c) => c.labels[i].to_string(),
            Targets::Regression(v) | Targets::Scores(v) => format_real(v[i]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSummary {
    pub n_observations: usize,
    pub n_features: usize,
    pub n_classes: Option<usize>,
    pub class_counts: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    observations: DMatrix<f64>,
    targets: Option<Targets>,
    feature_names: Vec<String>,
    observation_ids: Vec<String>,
}

impl DataSet {
    /// Wraps an `n x d` observation matrix. Features are named `f0..`, ids
    /// default to the row index.
    pub fn new(observations: DMatrix<f64>) -> Result<Self> {
        if let Some(pos) = observations.iter().position(|v| !v.is_finite()) {
            let n = observations.nrows();
            return Err(Error::NonFinite { row: pos % n, column: pos / n });
        }
        let feature_names = (0..observations.ncols()).map(|j| format!("f{j}")).collect();
        let observation_ids = (0..observations.nrows()).map(|i| i.to_string()).collect();
        Ok(Self { observations, targets: None, feature_names, observation_ids })
    }

    /// Builds a dataset from `rows`, each holding `d` values.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], d: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != d) {
            return Err(Error::LengthMismatch { what: "row", expected: d, found: bad.as_ref().len() });
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i].as_ref()[j]))
    }

    pub fn with_targets(mut self, targets: Targets) -> Result<Self> {
        if targets.len() != self.n_observations() {
            return Err(Error::LengthMismatch {
                what: "targets",
                expected: self.n_observations(),
                found: targets.len(),
            });
        }
        if let Targets::Regression(v) | Targets::Scores(v) = &targets {
            if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row, column: 0 });
            }
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn without_targets(mut self) -> Self {
        self.targets = None;
        self
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::LengthMismatch {
                what: "feature names",
                expected: self.n_features(),
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn with_observation_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n_observations() {
            return Err(Error::LengthMismatch {
                what: "observation ids",
                expected: self.n_observations(),
                found: ids.len(),
            });
        }
        self.observation_ids = ids;
        Ok(self)
    }

    /// A dataset with new features but this dataset's targets and ids.
    pub fn with_features(&self, observations: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if observations.nrows() != self.n_observations() {
            return Err(Error::RowCountMismatch { left: self.n_observations(), right: observations.nrows() });
        }
        let mut out = DataSet::new(observations)?.with_feature_names(names)?;
        out.targets = self.targets.clone();
        out.observation_ids = self.observation_ids.clone();
        Ok(out)
    }

    pub fn n_observations(&self) -> usize {
        self.observations.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.observations.ncols()
    }

    pub fn observations(&self) -> &DMatrix<f64> {
        &self.observations
    }

    pub fn targets(&self) -> Option<&Targets> {
        self.targets.as_ref()
    }

    pub fn class_labels(&self) -> Option<&ClassLabels> {
        match &self.targets {
            Some(Targets::Classes(c)) => Some(c),
            _ => None,
        }
    }

    /// Class labels, or the error a classifier should report without them.
    pub fn require_class_labels(&self) -> Result<&ClassLabels> {
        match &self.targets {
            Some(Targets::Classes(c)) => Ok(c),
            Some(other) => Err(Error::WrongTargetKind(other.kind())),
            None => Err(Error::MissingTargets),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn observation_ids(&self) -> &[String] {
        &self.observation_ids
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.observations.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n_observations();
        &self.observations.as_slice()[j * n..(j + 1) * n]
    }

    /// Observations at `rows`, in that order, with their targets and ids.
    pub fn select_rows(&self, rows: &[usize]) -> DataSet {
        let obs = self.observations.select_rows(rows);
        DataSet {
            observations: obs,
            targets: self.targets.as_ref().map(|t| t.select(rows)),
            feature_names: self.feature_names.clone(),
            observation_ids: rows.iter().map(|&i| self.observation_ids[i].clone()).collect(),
        }
    }

    pub fn summary(&self) -> DatasetSummary {
        let labels = self.class_labels();
        DatasetSummary {
            n_observations: self.n_observations(),
            n_features: self.n_features(),
            n_classes: labels.map(|c| c.label_set().len()),
            class_counts: labels.map(ClassLabels::counts).unwrap_or_default(),
        }
    }

    /// Writes the dataset as CSV: features in order, then the target column
    /// (integer labels or reals) when targets are present.
    pub fn write_csv<W: Write>(&self, writer: W, target_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        if self.targets.is_some() {
            header.push(target_column);
        }
        w.write_record(&header)?;
        for i in 0..self.n_observations() {
            let mut rec: Vec<String> = self.observations.row(i).iter().map(|&v| format_real(v)).collect();
            if let Some(t) = &self.targets {
                rec.push(t.cell(i));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Loads a CSV file with a mandatory header row.
///
/// Columns other than `target_column` become features, in header order.
/// String class labels are numbered by first appearance; integer labels are
/// kept as written.
pub fn load_csv(path: impl AsRef<Path>, target_column: Option<&str>, kind: TargetKind) -> Result<DataSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    read_csv(file, target_column, kind)
}

pub fn read_csv<R: Read>(reader: R, target_column: Option<&str>, kind: TargetKind) -> Result<DataSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::EmptyFile);
    }
    let target_idx = match target_column {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_owned()))?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| Some(j) != target_idx).collect();

    let mut values = Vec::new();
    let mut target_cells = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::RaggedRows { line, expected: header.len(), found: rec.len() });
        }
        for &j in &feature_cols {
            values.push(parse_real(&rec[j], line, &header[j])?);
        }
        if let Some(t) = target_idx {
            target_cells.push((line, rec[t].to_owned()));
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyFile);
    }

    let d = feature_cols.len();
    let observations = DMatrix::from_row_slice(n, d, &values);
    let names = feature_cols.iter().map(|&j| header[j].clone()).collect();
    let ds = DataSet::new(observations)?.with_feature_names(names)?;
    let Some(t) = target_idx else {
        return Ok(ds);
    };
    let targets = match kind {
        TargetKind::ClassLabels => Targets::Classes(parse_labels(&target_cells)?),
        TargetKind::Regression | TargetKind::Scores => {
            let v = target_cells
                .iter()
                .map(|(line, cell)| parse_real(cell, *line, &header[t]))
                .collect::<Result<Vec<_>>>()?;
            if kind == TargetKind::Regression {
                Targets::Regression(v)
            } else {
                Targets::Scores(v)
            }
        }
    };
    ds.with_targets(targets)
}

fn parse_real(cell: &str, line: u64, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumericFeature { line, column: column.to_owned(), value: cell.to_owned() }),
    }
}

fn parse_labels(cells: &[(u64, String)]) -> Result<ClassLabels> {
    let ints: Option<Vec<i64>> = cells.iter().map(|(_, c)| c.parse::<i64>().ok()).collect();
    if let Some(labels) = ints {
        return ClassLabels::from_labels(labels);
    }
    let mut names: Vec<&str> = Vec::new();
    let labels = cells
        .iter()
        .map(|(_, c)| match names.iter().position(|n| *n == c) {
            Some(i) => i as i64,
            None => {
                names.push(c);
                (names.len() - 1) as i64
            }
        })
        .collect();
    let names = names.iter().enumerate().map(|(i, n)| (i as i64, (*n).to_owned())).collect();
    ClassLabels::from_labels(labels)?.with_names(names)
}

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Fisher's Iris data: 150 observations of sepal and petal length and width,
/// 50 from each of setosa (0), versicolor (1) and virginica (2).
pub fn gen_iris() -> DataSet {
    read_csv(IRIS_CSV.as_bytes(), Some("species"), TargetKind::ClassLabels).expect("bundled iris data is valid")
}

/// Binary relabeling: `positive` becomes 1, every other class 0.
pub fn relabel_one_vs_rest(ds: &DataSet, positive: i64) -> Result<DataSet> {
    let labels = ds.require_class_labels()?;
    if labels.label_set().binary_search(&positive).is_err() {
        return Err(Error::UnknownClass(positive.to_string()));
    }
    let name = labels.name(positive);
    let binary = labels.labels().iter().map(|&l| i64::from(l == positive)).collect();
    let names = BTreeMap::from([(0, format!("not {name}")), (1, name)]);
    let targets = ClassLabels::new(binary, vec![0, 1])?.with_names(names)?;
    let mut out = ds.clone();
    out.targets = Some(Targets::Classes(targets));
    Ok(out)
}

/// Column subset in the order given by `indices`.
pub fn retain_features(ds: &DataSet, indices: &[usize]) -> Result<DataSet> {
    let d = ds.n_features();
    if let Some(&index) = indices.iter().find(|&&j| j >= d) {
        return Err(Error::IndexOutOfRange { index, len: d });
    }
    let mut out = ds.clone();
    out.observations = ds.observations.select_columns(indices);
    out.feature_names = indices.iter().map(|&j| ds.feature_names[j].clone()).collect();
    Ok(out)
}

/// Features of `a` followed by features of `b`. Ids come from `a`.
pub fn concat_features(a: &DataSet, b: &DataSet) -> Result<DataSet> {
    if a.n_observations() != b.n_observations() {
        return Err(Error::RowCountMismatch { left: a.n_observations(), right: b.n_observations() });
    }
    let targets = match (&a.targets, &b.targets) {
        (Some(x), Some(y)) if x != y => return Err(Error::TargetConflict),
        (Some(x), _) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    };
    let n = a.n_observations();
    let (da, db) = (a.n_features(), b.n_features());
    let observations =
        DMatrix::from_fn(n, da + db, |i, j| if j < da { a.observations[(i, j)] } else { b.observations[(i, j - da)] });
    let mut feature_names = a.feature_names.clone();
    feature_names.extend(b.feature_names.iter().cloned());
    Ok(DataSet { observations, targets, feature_names, observation_ids: a.observation_ids.clone() })
}
