//! Tabular classification datasets: CSV ingestion, validation, stratified
//! 80/10/10 splitting, per-column training statistics and a synthetic blob
//! generator for tests and benchmarks.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::stats;

/// How the label column of a CSV file is addressed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

/// A real-valued feature matrix with dense integer class labels.
///
/// Labels are always re-encoded to `0..n_classes` in first-occurrence order;
/// the original label text is kept in `label_names`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularDataset<F> {
    name: String,
    features: Matrix<F>,
    labels: Vec<usize>,
    n_classes: usize,
    label_names: Vec<String>,
    feature_names: Vec<String>,
    label_name: String,
}

impl<F: Scalar> TabularDataset<F> {
    /// Validating constructor for a complete dataset: requires at least two
    /// classes, every class id in `0..n_classes` present, finite features.
    pub fn new(
        name: impl Into<String>,
        features: Matrix<F>,
        labels: Vec<usize>,
        n_classes: usize,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if labels.len() != features.rows() {
            return Err(Error::Shape {
                context: format!("dataset {name}"),
                expected: format!("{} labels", features.rows()),
                got: format!("{}", labels.len()),
            });
        }
        if n_classes < 2 {
            return Err(Error::SingleClass { name });
        }
        if features.rows() < n_classes {
            return Err(Error::TooFewRows {
                context: format!("dataset {name}"),
                needed: n_classes,
                got: features.rows(),
            });
        }
        if !features.is_finite() {
            let (row, col) = first_non_finite(&features);
            return Err(Error::NonFinite {
                row,
                column: col.to_string(),
            });
        }
        let mut seen = vec![false; n_classes];
        for &y in &labels {
            assert!(y < n_classes, "label id {y} out of range 0..{n_classes}");
            seen[y] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config(format!(
                "dataset {name}: some class in 0..{n_classes} has no rows"
            )));
        }
        let label_names = if label_names.is_empty() {
            (0..n_classes).map(|k| k.to_string()).collect()
        } else {
            assert_eq!(label_names.len(), n_classes);
            label_names
        };
        let feature_names = default_feature_names(features.cols());
        Ok(Self {
            name,
            features,
            labels,
            n_classes,
            label_names,
            feature_names,
            label_name: "label".to_string(),
        })
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    /// Number of feature columns.
    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Number of classes (K of the parent dataset for subset views).
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn features(&self) -> &Matrix<F> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Row indices of class `k`, ascending.
    pub fn class_indices(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row count per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// View of selected rows (duplicates allowed). The view keeps the parent
    /// class count and label names; it may not contain every class.
    pub fn subset(&self, rows: &[usize], name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            features: self.features.gather_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
        }
    }
}

fn first_non_finite<F: Scalar>(m: &Matrix<F>) -> (usize, usize) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m.get(i, j).is_finite() {
                return (i + 1, j + 1);
            }
        }
    }
    (0, 0)
}

fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

/// Per-column mean and population variance of a training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats<F> {
    pub mean: Vec<F>,
    pub variance: Vec<F>,
}

/// Column means and population variances (divide by n).
pub fn train_stats<F: Scalar>(ds: &TabularDataset<F>) -> TrainStats<F> {
    let x = ds.features();
    let (n, d) = (x.rows(), x.cols());
    assert!(n >= 1, "train_stats needs at least one row");
    let mut mean = vec![F::zero(); d];
    let mut variance = vec![F::zero(); d];
    let mut column = vec![F::zero(); n];
    for j in 0..d {
        for (i, slot) in column.iter_mut().enumerate() {
            *slot = x.get(i, j);
        }
        mean[j] = stats::mean(&column);
        variance[j] = stats::population_variance(&column);
    }
    TrainStats { mean, variance }
}

/// Stratified train/validation/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitDataset<F> {
    pub train: TabularDataset<F>,
    pub validation: TabularDataset<F>,
    pub test: TabularDataset<F>,
    pub split_seed: u64,
    /// Original row indices backing each partition (ascending).
    pub train_rows: Vec<usize>,
    pub val_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Classes too small to stratify are placed wholly in train and noted here.
    pub warnings: Vec<String>,
}

/// Largest-remainder apportionment of `total` units over `quotas`, each
/// entry capped by `caps`. Ties in remainder break toward lower index.
fn apportion(quotas: &[f64], total: usize, caps: &[usize]) -> Vec<usize> {
    let mut alloc: Vec<usize> = quotas
        .iter()
        .zip(caps)
        .map(|(&q, &cap)| (q.floor() as usize).min(cap))
        .collect();
    let mut remaining = total.saturating_sub(alloc.iter().sum());
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    while remaining > 0 {
        let mut progressed = false;
        for &i in &order {
            if remaining == 0 {
                break;
            }
            if alloc[i] < caps[i] {
                alloc[i] += 1;
                remaining -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break; // every class at cap; caller lives with the shortfall
        }
    }
    alloc
}

/// Deterministic stratified 80/10/10 split.
///
/// Global part sizes are exactly ⌊0.8n⌋ / ⌊0.1n⌋ / remainder; within that,
/// rows are apportioned per class by largest remainder so each class lands
/// within one row of its 80% share. Classes with fewer than 3 members go
/// wholly to train with a warning.
pub fn split<F: Scalar>(ds: &TabularDataset<F>, seed: u64) -> Result<SplitDataset<F>> {
    let n = ds.n();
    if n < 10 {
        return Err(Error::TooFewRows {
            context: format!("split of {}", ds.name()),
            needed: 10,
            got: n,
        });
    }
    let t_train = (0.8 * n as f64).floor() as usize;
    let t_val = (0.1 * n as f64).floor() as usize;

    let k = ds.n_classes();
    let mut warnings = Vec::new();
    let mut train_rows = Vec::new();
    let mut val_rows = Vec::new();
    let mut test_rows = Vec::new();

    // Tiny classes cannot be stratified; they train only.
    let mut eligible = Vec::new();
    let mut tiny_total = 0usize;
    for class in 0..k {
        let members = ds.class_indices(class);
        if members.len() < 3 {
            warnings.push(format!(
                "class {} ({}) has {} rows; placed wholly in train",
                class,
                ds.label_names()[class],
                members.len()
            ));
            tiny_total += members.len();
            train_rows.extend(members);
        } else {
            eligible.push((class, members));
        }
    }

    let pool = n - tiny_total;
    let train_budget = t_train.saturating_sub(tiny_total);
    let quotas_train: Vec<f64> = eligible
        .iter()
        .map(|(_, m)| m.len() as f64 * train_budget as f64 / pool as f64)
        .collect();
    let caps: Vec<usize> = eligible.iter().map(|(_, m)| m.len()).collect();
    let train_per_class = apportion(&quotas_train, train_budget, &caps);

    let quotas_val: Vec<f64> = eligible
        .iter()
        .map(|(_, m)| m.len() as f64 * t_val as f64 / pool as f64)
        .collect();
    let caps_val: Vec<usize> = caps
        .iter()
        .zip(&train_per_class)
        .map(|(&m, &t)| m - t)
        .collect();
    let val_per_class = apportion(&quotas_val, t_val, &caps_val);

    for (slot, (class, members)) in eligible.iter().enumerate() {
        let mut shuffled = members.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split", *class as u64));
        shuffled.shuffle(&mut rng);
        let n_train = train_per_class[slot];
        let n_val = val_per_class[slot];
        train_rows.extend(&shuffled[..n_train]);
        val_rows.extend(&shuffled[n_train..n_train + n_val]);
        test_rows.extend(&shuffled[n_train + n_val..]);
    }

    train_rows.sort_unstable();
    val_rows.sort_unstable();
    test_rows.sort_unstable();

    let part = |rows: &[usize], tag: &str| ds.subset(rows, format!("{}:{tag}", ds.name()));
    Ok(SplitDataset {
        train: part(&train_rows, "train"),
        validation: part(&val_rows, "val"),
        test: part(&test_rows, "test"),
        split_seed: seed,
        train_rows,
        val_rows,
        test_rows,
        warnings,
    })
}

/// Load a CSV file into a dataset.
///
/// Every non-label cell must parse as a finite real number; labels may be
/// arbitrary text and are re-encoded densely in first-occurrence order.
pub fn load_csv<F: Scalar>(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    has_header: bool,
) -> Result<TabularDataset<F>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let header: Option<Vec<String>> = if has_header {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let label_idx = match (label_column, &header) {
        (LabelColumn::Index(i), _) => *i,
        (LabelColumn::Name(name), Some(cols)) => cols
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
        (LabelColumn::Name(name), None) => {
            return Err(Error::Config(format!(
                "label column {name:?} addressed by name but the file has no header"
            )))
        }
    };

    let column_name = |j: usize| -> String {
        header
            .as_ref()
            .and_then(|h| h.get(j).cloned())
            .unwrap_or_else(|| format!("{j}"))
    };

    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut labels = Vec::new();
    let mut label_ids: Vec<String> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        if label_idx >= record.len() {
            return Err(Error::MissingLabelColumn(format!("index {label_idx}")));
        }
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_no + 1,
                column: column_name(j),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: row_no + 1,
                    column: column_name(j),
                    value: cell.to_string(),
                });
            }
            row.push(F::from_f64(value));
        }
        if row.is_empty() {
            return Err(Error::Config(format!(
                "{}: no feature columns besides the label",
                path.display()
            )));
        }
        let text = record.get(label_idx).unwrap_or_default().to_string();
        let id = match label_ids.iter().position(|l| l == &text) {
            Some(id) => id,
            None => {
                label_ids.push(text);
                label_ids.len() - 1
            }
        };
        labels.push(id);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    if label_ids.len() < 2 {
        return Err(Error::SingleClass { name });
    }

    let n_classes = label_ids.len();
    let features = Matrix::from_rows(&rows);
    let mut ds = TabularDataset::new(name, features, labels, n_classes, label_ids)?;
    if let Some(cols) = header {
        ds.feature_names = cols
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != label_idx)
            .map(|(_, c)| c.clone())
            .collect();
        ds.label_name = cols[label_idx].clone();
    }
    Ok(ds)
}

/// Write a dataset as CSV (header, features, original label text). Float
/// formatting is shortest-round-trip, so `load_csv ∘ write_csv` is exact.
pub fn write_csv<F: Scalar>(ds: &TabularDataset<F>, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = ds.feature_names.clone();
    header.push(ds.label_name.clone());
    writer.write_record(&header)?;
    for i in 0..ds.n() {
        let mut record: Vec<String> = ds.features.row(i).iter().map(|v| v.to_string()).collect();
        record.push(ds.label_names[ds.labels[i]].clone());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Synthetic dataset: `k` Gaussian clusters with distinct means drawn from
/// `U[0,10)^d`, labels assigned round-robin so classes stay balanced.
pub fn make_blobs<F: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    spread: f64,
    seed: u64,
) -> TabularDataset<F> {
    assert!(k >= 2, "make_blobs needs at least two classes");
    assert!(n >= k, "make_blobs needs n >= k");
    assert!(d >= 1, "make_blobs needs at least one dimension");

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "blob-centers", 0));
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();

    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "blob-noise", 0));
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % k;
        labels.push(class);
        for &center in &centers[class] {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            data.push(F::from_f64(center + spread * z));
        }
    }
    let features = Matrix::from_vec(n, d, data);
    TabularDataset::new(
        format!("blobs_n{n}_d{d}_k{k}"),
        features,
        labels,
        k,
        Vec::new(),
    )
    .expect("blob construction satisfies dataset invariants")
}
