//! Tabular data model shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Outlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Genuine,
    Artificial,
}

/// An `n x d` table of finite values, stored row-major, with a class label and
/// a provenance tag per row.
///
/// A dataset may hold zero rows (e.g. a filter that removed everything); the
/// operations that need data check `len() >= 1` themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    dim: usize,
    names: Vec<String>,
    labels: Vec<Label>,
    provenance: Vec<Provenance>,
}

impl Dataset {
    /// Builds a dataset from rows. Every row must have `names.len()` finite values.
    pub fn from_rows(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let dim = names.len();
        if labels.len() != rows.len() || provenance.len() != rows.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels and {} provenance tags",
                rows.len(),
                labels.len(),
                provenance.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: r, column: c });
                }
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            values,
            dim,
            names,
            labels,
            provenance,
        })
    }

    /// Genuine rows with a single label.
    pub fn genuine(names: Vec<String>, rows: Vec<Vec<f64>>, label: Label) -> Result<Self> {
        let n = rows.len();
        Self::from_rows(names, rows, vec![label; n], vec![Provenance::Genuine; n])
    }

    /// Artificial outliers built from a flat row-major buffer.
    pub fn artificial(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let dim = names.len();
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "buffer of {} values does not split into rows of {}",
                values.len(),
                dim
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / dim,
                column: i % dim,
            });
        }
        let n = values.len() / dim;
        Ok(Self {
            values,
            dim,
            names,
            labels: vec![Label::Outlier; n],
            provenance: vec![Provenance::Artificial; n],
        })
    }

    /// Unnamed genuine normal data, mostly for tests and examples.
    pub fn from_points(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::genuine(default_names(dim), rows, Label::Normal)
    }

    /// An empty table with the given attribute names.
    pub fn empty(names: Vec<String>) -> Self {
        Self {
            values: Vec::new(),
            dim: names.len(),
            names,
            labels: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Per-attribute `(min, max)`. Empty datasets yield an empty vector.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.rows() {
            for (bj, &v) in b.iter_mut().zip(row) {
                bj.0 = bj.0.min(v);
                bj.1 = bj.1.max(v);
            }
        }
        b
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            dim: self.dim,
            names: self.names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provenance: indices.iter().map(|&i| self.provenance[i]).collect(),
        }
    }

    /// Rows for which `keep` holds.
    pub fn filter_rows(&self, mut keep: impl FnMut(usize, &[f64]) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i, self.row(i))).collect();
        self.subset(&idx)
    }

    pub fn with_label(&self, label: Label) -> Self {
        self.filter_rows(|i, _| self.labels[i] == label)
    }

    /// Concatenates two datasets with the same dimensionality.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let mut out = self.clone();
        out.values.extend_from_slice(&other.values);
        out.labels.extend_from_slice(&other.labels);
        out.provenance.extend_from_slice(&other.provenance);
        Ok(out)
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn default_names(dim: usize) -> Vec<String> {
    (0..dim).map(|j| format!("x{j}")).collect()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}
