//! Datasets, splits and their on-disk formats.
//!
//! Matrices are stored sample-major on disk (one sample per CSV row) and
//! column-major `d × N` in memory; the transpose happens only in the CSV
//! readers and writers.

mod csv_io;
mod manifest;
mod split;

pub use csv_io::{
    load_labels_csv, load_matrix_csv, load_semantics_csv, save_labels_csv, save_matrix_csv,
    save_semantics_csv,
};
pub use manifest::{load_manifest, save_dataset, Manifest};
pub use split::{gzsl_split, zsl_split, GzslSplit, ZslSplit, DEFAULT_GZSL_HOLDOUT};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlin::{norm2, Matrix};
use crate::zsl::PrototypeSet;

/// Class identifier as it appears in label files and manifests.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ClassId(String);

impl ClassId {
    pub fn new(id: impl Into<String>) -> Self {
        ClassId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ClassId {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        Ok(match Raw::deserialize(de)? {
            Raw::Text(s) => ClassId(s),
            Raw::Int(i) => ClassId(i.to_string()),
        })
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassId {
    fn from(s: &str) -> Self {
        ClassId(s.to_owned())
    }
}

impl From<String> for ClassId {
    fn from(s: String) -> Self {
        ClassId(s)
    }
}

impl From<usize> for ClassId {
    fn from(i: usize) -> Self {
        ClassId(i.to_string())
    }
}

/// Features with one class label per sample and optional per-class
/// semantic vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    features: Matrix,
    labels: Vec<ClassId>,
    semantics: Option<PrototypeSet>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<ClassId>,
        semantics: Option<PrototypeSet>,
    ) -> Result<Self> {
        if features.cols() != labels.len() {
            return Err(Error::data(format!(
                "{} feature columns but {} labels",
                features.cols(),
                labels.len()
            )));
        }
        if let Err(e) = features.ensure_finite("features") {
            return Err(Error::data(e.to_string()));
        }
        if let Some(sem) = &semantics {
            if let Some(missing) = labels.iter().find(|c| sem.index_of(c).is_none()) {
                return Err(Error::data(format!("class '{missing}' has no semantic vector")));
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            features,
            labels,
            semantics,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn semantics(&self) -> Option<&PrototypeSet> {
        self.semantics.as_ref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    /// Distinct classes in order of first appearance.
    pub fn classes(&self) -> Vec<ClassId> {
        distinct_in_order(&self.labels)
    }

    pub fn class_counts(&self) -> HashMap<&ClassId, usize> {
        let mut counts = HashMap::new();
        for c in &self.labels {
            *counts.entry(c).or_insert(0) += 1;
        }
        counts
    }

    /// Sample indices belonging to any of `classes`, ascending.
    pub fn indices_of(&self, classes: &[ClassId]) -> Vec<usize> {
        let set: BTreeSet<&ClassId> = classes.iter().collect();
        (0..self.len()).filter(|&i| set.contains(&self.labels[i])).collect()
    }

    /// The samples at `idx`, in that order, sharing this dataset's semantics.
    pub fn subset(&self, idx: &[usize], name: impl Into<String>) -> LabeledDataset {
        LabeledDataset {
            name: name.into(),
            features: self.features.select_columns(idx),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            semantics: self.semantics.clone(),
        }
    }

    /// Same samples with different features (e.g. after normalization).
    pub fn with_features(&self, features: Matrix) -> Result<LabeledDataset> {
        LabeledDataset::new(self.name.clone(), features, self.labels.clone(), self.semantics.clone())
    }

    /// Per-sample semantic matrix (k×N): column i is the prototype of
    /// sample i's class.
    pub fn semantic_matrix(&self) -> Result<Matrix> {
        let sem = self
            .semantics
            .as_ref()
            .ok_or_else(|| Error::data(format!("dataset '{}' has no semantic vectors", self.name)))?;
        sem.per_sample(&self.labels)
    }
}

/// Seen/unseen class partition for zero-shot experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seen: Vec<ClassId>,
    pub unseen: Vec<ClassId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gzsl_holdout: Option<f64>,
}

impl SplitSpec {
    pub fn new(seen: Vec<ClassId>, unseen: Vec<ClassId>, gzsl_holdout: Option<f64>) -> Result<Self> {
        let spec = SplitSpec {
            seen,
            unseen,
            gzsl_holdout,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seen.is_empty() || self.unseen.is_empty() {
            return Err(Error::data("split needs at least one seen and one unseen class"));
        }
        let seen: BTreeSet<&ClassId> = self.seen.iter().collect();
        if seen.len() != self.seen.len() {
            return Err(Error::data("duplicate class in seen_classes"));
        }
        let unseen: BTreeSet<&ClassId> = self.unseen.iter().collect();
        if unseen.len() != self.unseen.len() {
            return Err(Error::data("duplicate class in unseen_classes"));
        }
        if let Some(c) = seen.intersection(&unseen).next() {
            return Err(Error::data(format!(
                "class '{c}' is both seen and unseen; seen and unseen classes must be disjoint"
            )));
        }
        if let Some(f) = self.gzsl_holdout {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::data(format!("gzsl_holdout must lie in (0, 1), got {f}")));
            }
        }
        Ok(())
    }
}

/// Scales every nonzero column to unit Euclidean norm.
pub fn l2_normalize_columns(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for j in 0..out.cols() {
        let col = out.column_mut(j);
        let n = norm2(col);
        if n > 0.0 {
            for v in col.iter_mut() {
                *v /= n;
            }
        }
    }
    out
}

pub(crate) fn distinct_in_order<T: Clone + Eq + std::hash::Hash>(items: &[T]) -> Vec<T> {
    let mut seen = std::collections::HashSet::new();
    items.iter().filter(|c| seen.insert(*c)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_hand_cases() {
        let m = Matrix::from_rows(&[[3.0, 1.0, 0.0], [4.0, 0.0, 0.0]]);
        let n = l2_normalize_columns(&m);
        assert!((n[(0, 0)] - 0.6).abs() < 1e-15 && (n[(1, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(n.column(1), &[1.0, 0.0]);
        assert_eq!(n.column(2), &[0.0, 0.0]);
    }

    #[test]
    fn split_rejects_overlap() {
        let err = SplitSpec::new(vec!["a".into(), "b".into()], vec!["b".into()], None).unwrap_err();
        assert!(err.to_string().contains("disjoint"));
        assert!(SplitSpec::new(vec![], vec!["b".into()], None).is_err());
        assert!(SplitSpec::new(vec!["a".into()], vec!["b".into()], Some(1.0)).is_err());
    }

    #[test]
    fn dataset_requires_semantics_for_every_label() {
        let sem = PrototypeSet::new(vec!["a".into()], Matrix::from_rows(&[[1.0]])).unwrap();
        let err = LabeledDataset::new("t", Matrix::zeros(2, 2), vec!["a".into(), "b".into()], Some(sem));
        assert!(err.is_err());
    }

    #[test]
    fn class_id_accepts_numbers_in_json() {
        let ids: Vec<ClassId> = serde_json::from_str(r#"["x", 3]"#).unwrap();
        assert_eq!(ids, vec![ClassId::from("x"), ClassId::from(3usize)]);
    }
}
