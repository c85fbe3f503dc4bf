use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

use super::{
    load_labels_csv, load_matrix_csv, load_semantics_csv, save_labels_csv, save_matrix_csv,
    save_semantics_csv, ClassId, LabeledDataset, SplitSpec,
};

/// On-disk description of a dataset. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub features_csv: PathBuf,
    pub labels_csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seen_classes: Option<Vec<ClassId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unseen_classes: Option<Vec<ClassId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gzsl_holdout: Option<f64>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// The split, if both class lists are given.
    pub fn split(&self) -> Result<Option<SplitSpec>> {
        match (&self.seen_classes, &self.unseen_classes) {
            (Some(seen), Some(unseen)) => {
                SplitSpec::new(seen.clone(), unseen.clone(), self.gzsl_holdout).map(Some)
            }
            (None, None) => Ok(None),
            _ => Err(Error::data("seen_classes and unseen_classes must be given together")),
        }
    }
}

/// Loads and cross-validates everything a manifest refers to.
///
/// Without `seen_classes`/`unseen_classes` the split is `None` and the
/// dataset is only usable for clustering.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<(LabeledDataset, Option<SplitSpec>)> {
    let path = path.as_ref();
    let manifest = Manifest::read(path)?;
    let base = path.parent().unwrap_or(Path::new(""));

    let features = load_matrix_csv(base.join(&manifest.features_csv))?;
    let labels = load_labels_csv(base.join(&manifest.labels_csv))?;
    let semantics = match &manifest.semantics_csv {
        Some(p) => Some(load_semantics_csv(base.join(p))?),
        None => None,
    };
    let name = manifest.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let dataset = LabeledDataset::new(name, features, labels, semantics)?;

    let split = manifest.split()?;
    if let Some(spec) = &split {
        let counts = dataset.class_counts();
        for c in spec.seen.iter().chain(&spec.unseen) {
            if !counts.contains_key(c) {
                return Err(Error::data(format!("split names class '{c}' absent from labels")));
            }
        }
        if let Some(sem) = dataset.semantics() {
            for c in spec.seen.iter().chain(&spec.unseen) {
                if sem.index_of(c).is_none() {
                    return Err(Error::data(format!("class '{c}' has no semantic vector")));
                }
            }
        }
    }
    Ok((dataset, split))
}

/// Writes `features.csv`, `labels.csv`, optional `semantics.csv` and
/// `manifest.json` into `dir`; returns the manifest path.
pub fn save_dataset(dir: impl AsRef<Path>, dataset: &LabeledDataset, split: Option<&SplitSpec>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_matrix_csv(dir.join("features.csv"), dataset.features())?;
    save_labels_csv(dir.join("labels.csv"), dataset.labels())?;
    let semantics_csv = match dataset.semantics() {
        Some(sem) => {
            save_semantics_csv(dir.join("semantics.csv"), sem)?;
            Some(PathBuf::from("semantics.csv"))
        }
        None => None,
    };
    let manifest = Manifest {
        name: Some(dataset.name.clone()),
        features_csv: "features.csv".into(),
        labels_csv: "labels.csv".into(),
        semantics_csv,
        seen_classes: split.map(|s| s.seen.clone()),
        unseen_classes: split.map(|s| s.unseen.clone()),
        gzsl_holdout: split.and_then(|s| s.gzsl_holdout),
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;
    Ok(path)
}
