//! Defect datasets: loading, validation, inclusion statistics.
//!
//! A dataset file is comma-separated text with a header row. One column holds
//! the defect label; every other column (minus any explicitly dropped
//! identifier columns) must be numeric. Missing cells are a hard error.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed delimited file: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: label column `{column}` not found in header")]
    MissingLabelColumn { path: PathBuf, column: String },
    #[error("{path}: line {line}, column `{column}`: non-numeric value `{value}`")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: String,
        value: String,
    },
    #[error("{path}: line {line}, column `{column}`: missing value")]
    MissingValue { path: PathBuf, line: usize, column: String },
    #[error("{path}: line {line}: unknown label value `{value}`")]
    UnknownLabel { path: PathBuf, line: usize, value: String },
    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset `{project}` has only one class ({buggy} buggy of {total})")]
    SingleClass {
        project: String,
        buggy: usize,
        total: usize,
    },
    #[error("dataset `{project}`: duplicate metric name `{name}`")]
    DuplicateMetric { project: String, name: String },
    #[error("dataset `{project}`: {detail}")]
    Shape { project: String, detail: String },
    #[error("dataset `{project}`: non-finite value at row {row}, metric `{metric}`")]
    NonFinite {
        project: String,
        row: usize,
        metric: String,
    },
    #[error("manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
}

/// How raw label cells map to buggy / clean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelEncoding {
    /// `0/1`, `N/Y`, `false/true`, `clean/buggy`, case-insensitive.
    #[default]
    Binary,
    /// Non-negative defect counts; any count above zero is buggy.
    Count,
}

impl LabelEncoding {
    pub fn decode(self, raw: &str) -> Option<bool> {
        let v = raw.trim();
        match self {
            LabelEncoding::Binary => {
                let lower = v.to_ascii_lowercase();
                match lower.as_str() {
                    "1" | "y" | "true" | "buggy" => Some(true),
                    "0" | "n" | "false" | "clean" => Some(false),
                    _ => None,
                }
            }
            LabelEncoding::Count => match v.parse::<f64>() {
                Ok(c) if c.is_finite() && c >= 0.0 => Some(c > 0.0),
                _ => None,
            },
        }
    }
}

/// Instance-by-metric matrix with binary defect labels.
///
/// Immutable once built; every constructor path goes through [`DefectDataset::new`],
/// which enforces the shape, uniqueness, finiteness, and two-class invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectDataset {
    project_name: String,
    group_name: String,
    metric_names: Vec<String>,
    instances: Matrix,
    labels: Vec<bool>,
}

impl DefectDataset {
    pub fn new(
        project_name: impl Into<String>,
        group_name: impl Into<String>,
        metric_names: Vec<String>,
        instances: Matrix,
        labels: Vec<bool>,
    ) -> Result<Self, DatasetError> {
        let project_name = project_name.into();
        if instances.n_rows() != labels.len() {
            return Err(DatasetError::Shape {
                project: project_name,
                detail: format!("{} rows but {} labels", instances.n_rows(), labels.len()),
            });
        }
        if instances.n_cols() != metric_names.len() {
            return Err(DatasetError::Shape {
                project: project_name,
                detail: format!("{} columns but {} metric names", instances.n_cols(), metric_names.len()),
            });
        }
        let mut seen = HashSet::new();
        for name in &metric_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateMetric {
                    project: project_name,
                    name: name.clone(),
                });
            }
        }
        for (r, row) in instances.rows_iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite {
                    project: project_name,
                    row: r,
                    metric: metric_names[c].clone(),
                });
            }
        }
        let buggy = labels.iter().filter(|&&b| b).count();
        if buggy == 0 || buggy == labels.len() {
            return Err(DatasetError::SingleClass {
                project: project_name,
                buggy,
                total: labels.len(),
            });
        }
        Ok(Self {
            project_name,
            group_name: group_name.into(),
            metric_names,
            instances,
            labels,
        })
    }

    pub fn project_name(&self) -> &str {
        &self.project_name
    }

    pub fn group_name(&self) -> &str {
        &self.group_name
    }

    pub fn metric_names(&self) -> &[String] {
        &self.metric_names
    }

    pub fn instances(&self) -> &Matrix {
        &self.instances
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_metrics(&self) -> usize {
        self.metric_names.len()
    }

    pub fn n_buggy(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|m| m == name)
    }

    pub fn column(&self, metric: usize) -> Vec<f64> {
        self.instances.column(metric)
    }

    /// Rows `rows` as a new matrix plus their labels. No class check.
    pub fn subset_rows(&self, rows: &[usize]) -> (Matrix, Vec<bool>) {
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        (self.instances.select_rows(rows), labels)
    }
}

/// Inclusion statistics for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_instances: usize,
    pub n_buggy: usize,
    pub buggy_ratio: f64,
    pub n_metrics: usize,
    /// Events per variable: buggy instances per metric.
    pub epv: f64,
}

pub fn compute_stats(d: &DefectDataset) -> DatasetStats {
    let n_instances = d.n_instances();
    let n_buggy = d.n_buggy();
    let n_metrics = d.n_metrics();
    DatasetStats {
        n_instances,
        n_buggy,
        buggy_ratio: n_buggy as f64 / n_instances as f64,
        n_metrics,
        epv: if n_metrics == 0 {
            0.0
        } else {
            n_buggy as f64 / n_metrics as f64
        },
    }
}

/// Thresholds for dataset inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionCriteria {
    /// Inclusive lower bound on EPV.
    pub min_epv: f64,
    /// Datasets with a strictly larger buggy ratio are rejected.
    pub max_buggy_ratio: f64,
}

impl Default for InclusionCriteria {
    fn default() -> Self {
        Self {
            min_epv: 10.0,
            max_buggy_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectionReason {
    Epv,
    DefectRatio,
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectionReason::Epv => f.write_str("EPV"),
            RejectionReason::DefectRatio => f.write_str("defect ratio"),
        }
    }
}

impl InclusionCriteria {
    /// First violated criterion, if any. EPV is checked before defect ratio.
    pub fn check(&self, stats: &DatasetStats) -> Option<RejectionReason> {
        if stats.epv < self.min_epv {
            Some(RejectionReason::Epv)
        } else if stats.buggy_ratio > self.max_buggy_ratio {
            Some(RejectionReason::DefectRatio)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct InclusionOutcome<T> {
    pub accepted: Vec<T>,
    pub rejected: Vec<(T, RejectionReason)>,
}

/// Partitions datasets into accepted and rejected, preserving input order.
pub fn apply_inclusion_criteria(
    datasets: Vec<DefectDataset>,
    criteria: &InclusionCriteria,
) -> InclusionOutcome<DefectDataset> {
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for d in datasets {
        match criteria.check(&compute_stats(&d)) {
            None => accepted.push(d),
            Some(reason) => rejected.push((d, reason)),
        }
    }
    InclusionOutcome { accepted, rejected }
}

/// Options controlling how a file is read.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub label_encoding: LabelEncoding,
    /// Non-metric columns (identifiers, version strings) to skip.
    pub drop_columns: Vec<String>,
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    project_name: &str,
    group_name: &str,
    label_column: &str,
) -> Result<DefectDataset, DatasetError> {
    load_dataset_with(path, project_name, group_name, label_column, &LoadOptions::default())
}

pub fn load_dataset_with(
    path: impl AsRef<Path>,
    project_name: &str,
    group_name: &str,
    label_column: &str,
    opts: &LoadOptions,
) -> Result<DefectDataset, DatasetError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&bytes, path, project_name, group_name, label_column, opts)
}

/// Parses dataset bytes. `path` is used only for error messages.
pub fn parse_dataset(
    bytes: &[u8],
    path: &Path,
    project_name: &str,
    group_name: &str,
    label_column: &str,
    opts: &LoadOptions,
) -> Result<DefectDataset, DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_string())
        .collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let metric_cols: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_idx && !opts.drop_columns.iter().any(|d| d == &header[i]))
        .collect();
    let metric_names: Vec<String> = metric_cols.iter().map(|&i| header[i].clone()).collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = row_idx + 2;
        if record.len() != header.len() {
            return Err(DatasetError::RaggedRow {
                path: path.to_path_buf(),
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let raw_label = &record[label_idx];
        let label = opts
            .label_encoding
            .decode(raw_label)
            .ok_or_else(|| DatasetError::UnknownLabel {
                path: path.to_path_buf(),
                line,
                value: raw_label.to_string(),
            })?;
        labels.push(label);
        for &c in &metric_cols {
            let cell = &record[c];
            if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
                return Err(DatasetError::MissingValue {
                    path: path.to_path_buf(),
                    line,
                    column: header[c].clone(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| DatasetError::NonNumeric {
                path: path.to_path_buf(),
                line,
                column: header[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::NonNumeric {
                    path: path.to_path_buf(),
                    line,
                    column: header[c].clone(),
                    value: cell.to_string(),
                });
            }
            data.push(v);
        }
    }
    let instances = Matrix::from_row_major(labels.len(), metric_names.len(), data);
    DefectDataset::new(project_name, group_name, metric_names, instances, labels)
}

/// Writes `d` as CSV: metric columns then `label_column` holding `buggy`/`clean`.
/// Values use the shortest representation that reads back exactly.
pub fn write_dataset(d: &DefectDataset, path: impl AsRef<Path>, label_column: &str) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let csv_err = |source| DatasetError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = d.metric_names().iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header).map_err(csv_err)?;
    for (row, &buggy) in d.instances().rows_iter().zip(d.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(if buggy { "buggy" } else { "clean" }.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One manifest line: where a dataset lives and how to read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub project: String,
    pub group: String,
    pub label_column: String,
    #[serde(default)]
    pub label_encoding: LabelEncoding,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drop_columns: Vec<String>,
}

/// List of datasets for an experiment, read from TOML:
///
/// ```toml
/// [[dataset]]
/// path = "eclipse/JDT.csv"
/// project = "JDT"
/// group = "Eclipse"
/// label_column = "class"
/// label_encoding = "binary"   # or "count"
/// drop_columns = ["name"]
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, rename = "dataset")]
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn from_toml_str(text: &str, base_dir: &Path, origin: &Path) -> Result<Self, DatasetError> {
        let mut manifest: Manifest = toml::from_str(text).map_err(|e| DatasetError::Manifest {
            path: origin.to_path_buf(),
            detail: e.to_string(),
        })?;
        let mut seen = HashSet::new();
        for e in &mut manifest.entries {
            if !seen.insert(e.project.clone()) {
                return Err(DatasetError::Manifest {
                    path: origin.to_path_buf(),
                    detail: format!("duplicate project name `{}`", e.project),
                });
            }
            if e.path.is_relative() {
                e.path = base_dir.join(&e.path);
            }
        }
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Loads every entry, in manifest order. Independent per file, so done in parallel.
    pub fn load_all(&self) -> Vec<Result<DefectDataset, DatasetError>> {
        use rayon::prelude::*;
        self.entries
            .par_iter()
            .map(|e| {
                load_dataset_with(
                    &e.path,
                    &e.project,
                    &e.group,
                    &e.label_column,
                    &LoadOptions {
                        label_encoding: e.label_encoding,
                        drop_columns: e.drop_columns.clone(),
                    },
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(text: &str, label: &str) -> Result<DefectDataset, DatasetError> {
        parse_dataset(
            text.as_bytes(),
            Path::new("mem.csv"),
            "P",
            "G",
            label,
            &LoadOptions::default(),
        )
    }

    /// Dataset with `buggy` buggy rows out of `total`, `metrics` columns.
    pub(crate) fn shaped(name: &str, total: usize, buggy: usize, metrics: usize) -> DefectDataset {
        let names = (0..metrics).map(|i| format!("m{i}")).collect();
        let data = (0..total * metrics).map(|i| (i % 7) as f64).collect();
        let labels = (0..total).map(|i| i < buggy).collect();
        DefectDataset::new(name, "G", names, Matrix::from_row_major(total, metrics, data), labels).unwrap()
    }

    #[test]
    fn four_row_file() {
        let d = parse("a,b,bug\n1,2,Y\n3,4,N\n5,6,y\n7,8,n\n", "bug").unwrap();
        let s = compute_stats(&d);
        assert_eq!((s.n_instances, s.n_metrics, s.n_buggy), (4, 2, 2));
        assert_eq!(d.metric_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.instances().row(2), &[5.0, 6.0]);
    }

    #[test]
    fn label_column_removed_and_order_kept() {
        let d = parse("x,class,y,z\n1,buggy,2,3\n4,clean,5,6\n", "class").unwrap();
        assert_eq!(d.metric_names(), &["x", "y", "z"]);
        assert_eq!(d.labels(), &[true, false]);
        assert_eq!(d.instances().row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn all_encodings_decode() {
        for (t, f) in [("1", "0"), ("Y", "N"), ("TRUE", "false"), ("Buggy", "CLEAN")] {
            let d = parse(&format!("a,l\n1,{t}\n2,{f}\n"), "l").unwrap();
            assert_eq!(d.labels(), &[true, false]);
        }
        assert_eq!(LabelEncoding::Count.decode("3"), Some(true));
        assert_eq!(LabelEncoding::Count.decode("0"), Some(false));
        assert_eq!(LabelEncoding::Count.decode("-1"), None);
    }

    #[test]
    fn unknown_label_rejected() {
        let err = parse("a,l\n1,Y\n2,maybe\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::UnknownLabel { line: 3, .. }), "{err}");
    }

    #[test]
    fn non_numeric_and_missing_rejected() {
        let err = parse("a,l\n1,Y\nabc,N\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::NonNumeric { .. }));
        let err = parse("a,b,l\n1,,Y\n2,3,N\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::MissingValue { .. }));
        let err = parse("a,l\ninf,Y\n2,N\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::NonNumeric { .. }));
    }

    #[test]
    fn single_class_rejected() {
        let err = parse("a,l\n1,N\n2,N\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::SingleClass { buggy: 0, .. }));
    }

    #[test]
    fn missing_label_column() {
        let err = parse("a,b\n1,2\n", "bug").unwrap_err();
        assert!(matches!(err, DatasetError::MissingLabelColumn { .. }));
    }

    #[test]
    fn duplicate_metric_names_rejected() {
        let err = parse("a,a,l\n1,2,Y\n3,4,N\n", "l").unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateMetric { .. }));
    }

    #[test]
    fn drop_columns_skips_identifiers() {
        let d = parse_dataset(
            b"name,a,bug\nfoo.Bar,1,2\nfoo.Baz,3,0\n",
            Path::new("mem.csv"),
            "P",
            "G",
            "bug",
            &LoadOptions {
                label_encoding: LabelEncoding::Count,
                drop_columns: vec!["name".into()],
            },
        )
        .unwrap();
        assert_eq!(d.metric_names(), &["a"]);
        assert_eq!(d.labels(), &[true, false]);
    }

    #[test]
    fn stats_arithmetic() {
        let s = compute_stats(&shaped("T", 100, 10, 10));
        assert_eq!(s.epv, 1.0);
        assert_eq!(s.buggy_ratio, 0.10);
    }

    #[test]
    fn published_epv_values() {
        // JDT: 206 buggy over 19 metrics; SWT: 653 over 17.
        let jdt = compute_stats(&shaped("JDT", 997, 206, 19));
        assert_eq!(format!("{:.1}", jdt.epv), "10.8");
        assert!((jdt.epv - 10.842).abs() < 1e-3);
        let swt = compute_stats(&shaped("SWT", 1485, 653, 17));
        assert_eq!(format!("{:.1}", swt.epv), "38.4");
        assert_eq!(format!("{:.1}", 100.0 * jdt.buggy_ratio), "20.7");
    }

    #[test]
    fn inclusion_boundaries() {
        let c = InclusionCriteria::default();
        let below = shaped("below", 1000, 99, 10); // epv 9.9
        let at = shaped("at", 1000, 100, 10); // epv 10
        let heavy = shaped("heavy", 100, 55, 2); // ratio 0.55
        let half = shaped("half", 100, 50, 2); // ratio 0.5 kept
        let out = apply_inclusion_criteria(vec![below, at, heavy, half], &c);
        let acc: Vec<_> = out.accepted.iter().map(|d| d.project_name()).collect();
        assert_eq!(acc, vec!["at", "half"]);
        let rej: Vec<_> = out.rejected.iter().map(|(d, r)| (d.project_name(), *r)).collect();
        assert_eq!(
            rej,
            vec![("below", RejectionReason::Epv), ("heavy", RejectionReason::DefectRatio)]
        );
    }

    #[test]
    fn first_violated_criterion_reported() {
        // both EPV and ratio fail
        let d = shaped("both", 10, 6, 2);
        let out = apply_inclusion_criteria(vec![d], &InclusionCriteria::default());
        assert_eq!(out.rejected[0].1, RejectionReason::Epv);
    }

    #[test]
    fn corpus_shaped_partition() {
        // 17 qualifying, 114 low-EPV, 5 mostly-buggy datasets.
        let mut all = Vec::new();
        for i in 0..17 {
            all.push(shaped(&format!("ok{i}"), 400, 100 + i, 10));
        }
        for i in 0..114 {
            all.push(shaped(&format!("epv{i}"), 200, 20 + (i % 60), 10));
        }
        for i in 0..5 {
            all.push(shaped(&format!("ratio{i}"), 300, 160 + i, 10));
        }
        let out = apply_inclusion_criteria(all, &InclusionCriteria::default());
        assert_eq!(out.accepted.len(), 17);
        let epv = out.rejected.iter().filter(|r| r.1 == RejectionReason::Epv).count();
        assert_eq!(epv, 114);
        assert_eq!(out.rejected.len() - epv, 5);
    }

    #[test]
    fn written_dataset_reads_back_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = DefectDataset::new(
            "p",
            "g",
            vec!["loc".into(), "cc".into()],
            Matrix::from_rows(&[vec![0.1 + 0.2, 1e-300], vec![12345.678, -3.0]]),
            vec![true, false],
        )
        .unwrap();
        write_dataset(&d, &path, "bug").unwrap();
        assert_eq!(load_dataset(&path, "p", "g", "bug").unwrap(), d);
    }

    #[test]
    fn manifest_roundtrip_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("a.csv");
        std::fs::File::create(&data)
            .unwrap()
            .write_all(b"m1,m2,bug\n1,2,1\n2,3,0\n4,4,0\n")
            .unwrap();
        let mpath = dir.path().join("m.toml");
        std::fs::write(
            &mpath,
            "[[dataset]]\npath = \"a.csv\"\nproject = \"A\"\ngroup = \"G\"\nlabel_column = \"bug\"\n",
        )
        .unwrap();
        let m = Manifest::load(&mpath).unwrap();
        assert_eq!(m.entries[0].path, data);
        let loaded = m.load_all();
        let d = loaded[0].as_ref().unwrap();
        assert_eq!(d.n_buggy(), 1);
        let again = Manifest::from_toml_str(&m.to_toml_string(), dir.path(), &mpath).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn manifest_duplicate_projects_rejected() {
        let text = "[[dataset]]\npath='a'\nproject='A'\ngroup='G'\nlabel_column='l'\n\
                    [[dataset]]\npath='b'\nproject='A'\ngroup='G'\nlabel_column='l'\n";
        let err = Manifest::from_toml_str(text, Path::new("."), Path::new("m.toml")).unwrap_err();
        assert!(err.to_string().contains("duplicate project"));
    }

    #[test]
    fn empty_manifest_is_valid() {
        let m = Manifest::from_toml_str("", Path::new("."), Path::new("m.toml")).unwrap();
        assert!(m.entries.is_empty());
    }
}
