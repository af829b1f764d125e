//! CSV ingestion and the fixed preprocessing pipeline:
//! load, remove duplicates, downsample, scale to the unit box, split.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;

use crate::data::{Dataset, Label, Provenance};
use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 1000;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

/// Which CSV column carries the class and which value marks an outlier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpec {
    pub column: String,
    pub outlier_value: String,
    /// Written for normal rows by [`write_csv`]; any value other than
    /// `outlier_value` reads back as normal.
    pub normal_value: String,
}

impl LabelSpec {
    pub fn new(column: impl Into<String>, outlier_value: impl Into<String>) -> Self {
        Self {
            column: column.into(),
            outlier_value: outlier_value.into(),
            normal_value: "normal".into(),
        }
    }
}

impl Default for LabelSpec {
    fn default() -> Self {
        Self::new("class", "outlier")
    }
}

/// Reads a headed, comma-separated file. Every column except the label
/// column must hold finite numbers. All rows are tagged genuine.
pub fn load_csv(path: impl AsRef<Path>, labels: &LabelSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == labels.column)
        .ok_or_else(|| Error::Parse {
            path: path.into(),
            row: 0,
            column: labels.column.clone(),
            message: "label column not found in header".into(),
        })?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut row_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        // 1-based data row, not counting the header
        let row_no = r + 1;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.into(),
                row: row_no,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(names.len());
        for (c, field) in record.iter().enumerate() {
            if c == label_idx {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.into(),
                row: row_no,
                column: headers[c].to_string(),
                message,
            };
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value `{field}`")));
            }
            values.push(v);
        }
        rows.push(values);
        row_labels.push(if record[label_idx] == labels.outlier_value {
            Label::Outlier
        } else {
            Label::Normal
        });
    }
    let n = rows.len();
    Dataset::from_rows(names, rows, row_labels, vec![Provenance::Genuine; n])
}

/// Writes attributes followed by the label column. Values use the shortest
/// representation that parses back to the same bits.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>, labels: &LabelSpec) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    header.push(&labels.column);
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (i, row) in data.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        fields.push(match data.labels()[i] {
            Label::Outlier => labels.outlier_value.clone(),
            Label::Normal => labels.normal_value.clone(),
        });
        w.write_record(&fields).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-attribute affine map onto `[0, 1]`. Constant attributes map to 0.
pub fn normalize_unit_box(data: &Dataset) -> (Dataset, Vec<(f64, f64)>) {
    let bounds = data.bounds();
    let mut out = data.clone();
    for i in 0..out.len() {
        for (v, &(lo, hi)) in out.row_mut(i).iter_mut().zip(&bounds) {
            *v = if hi > lo { ((*v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        }
    }
    (out, bounds)
}

/// Drops rows whose value vector already appeared; the first occurrence (and
/// its label) is kept.
pub fn remove_duplicates(data: &Dataset) -> Dataset {
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(data.len());
    // +0.0 and -0.0 compare equal
    let key = |row: &[f64]| row.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<u64>>();
    data.filter_rows(|_, row| seen.insert(key(row)))
}

/// Subsamples to `cap` rows keeping the outlier/normal ratio (rounded to the
/// nearest instance). Row order is preserved.
pub fn downsample_preserving_ratio<R: Rng + ?Sized>(
    data: &Dataset,
    cap: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if cap < 2 {
        return Err(Error::InvalidParameter(format!("downsample cap must be >= 2, got {cap}")));
    }
    let n = data.len();
    if n <= cap {
        return Ok(data.clone());
    }
    let outliers: Vec<usize> = (0..n).filter(|&i| data.labels()[i] == Label::Outlier).collect();
    let normals: Vec<usize> = (0..n).filter(|&i| data.labels()[i] == Label::Normal).collect();
    let keep_out = (cap as f64 * outliers.len() as f64 / n as f64).round() as usize;
    let keep_out = keep_out.min(outliers.len());
    let keep_norm = (cap - keep_out).min(normals.len());

    let mut idx: Vec<usize> = sample(rng, outliers.len(), keep_out)
        .into_iter()
        .map(|i| outliers[i])
        .chain(sample(rng, normals.len(), keep_norm).into_iter().map(|i| normals[i]))
        .collect();
    idx.sort_unstable();
    Ok(data.subset(&idx))
}

/// Train/test partition of the normal instances plus the genuine outliers.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train_norms: Dataset,
    pub test_norms: Dataset,
    pub outs: Dataset,
}

/// Random partition with `round(train_fraction * n)` training rows.
pub fn split_train_test<R: Rng + ?Sized>(
    norms: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let n = norms.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("split needs at least 2 rows, got {n}")));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut train = sample(rng, n, n_train).into_vec();
    train.sort_unstable();
    let mut in_train = vec![false; n];
    train.iter().for_each(|&i| in_train[i] = true);
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((norms.subset(&train), norms.subset(&test)))
}

/// Separates genuine outliers and splits the normal rows.
pub fn split_for_workflow<R: Rng + ?Sized>(
    data: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<SplitResult> {
    let norms = data.with_label(Label::Normal);
    let outs = data.with_label(Label::Outlier);
    let (train_norms, test_norms) = split_train_test(&norms, train_fraction, rng)?;
    Ok(SplitResult {
        train_norms,
        test_norms,
        outs,
    })
}

/// Dedup, downsample to `cap`, then scale to the unit box, so the bounds
/// reflect the sampled data.
pub fn preprocess<R: Rng + ?Sized>(data: &Dataset, cap: usize, rng: &mut R) -> Result<Dataset> {
    let deduped = remove_duplicates(data);
    let sampled = downsample_preserving_ratio(&deduped, cap, rng)?;
    Ok(normalize_unit_box(&sampled).0)
}
