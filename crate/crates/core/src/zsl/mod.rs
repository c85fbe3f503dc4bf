//! Nearest-prototype zero-shot classification and its metrics.

mod cv;
mod metrics;
mod report;
pub mod synthetic;

pub use cv::{cross_validate_lambda, CvConfig, CvOutcome, LambdaScore, DEFAULT_FOLDS, DEFAULT_LAMBDA_GRID};
pub use metrics::{
    ausuc, gzsl_accuracy, hit_at_k, multiway_accuracy, Accuracy, Ausuc, CurvePoint, GzslScores, DEFAULT_GAMMA_GRID,
};
pub use report::{EvalReport, EvalRow, ReportConfig};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{l2_normalize_columns, ClassId, LabeledDataset};
use crate::error::{Error, Result};
use crate::matlin::{dot, LinalgError, Matrix};
use crate::sae::{Method, Projection};

/// Class ids with one prototype column each (k×u).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrototypes")]
pub struct PrototypeSet {
    class_ids: Vec<ClassId>,
    protos: Matrix,
    #[serde(skip)]
    index: HashMap<ClassId, usize>,
}

#[derive(Deserialize)]
struct RawPrototypes {
    class_ids: Vec<ClassId>,
    protos: Matrix,
}

impl TryFrom<RawPrototypes> for PrototypeSet {
    type Error = Error;

    fn try_from(raw: RawPrototypes) -> Result<Self> {
        PrototypeSet::new(raw.class_ids, raw.protos)
    }
}

impl PrototypeSet {
    pub fn new(class_ids: Vec<ClassId>, protos: Matrix) -> Result<Self> {
        if class_ids.len() != protos.cols() {
            return Err(Error::data(format!(
                "{} class ids for {} prototype columns",
                class_ids.len(),
                protos.cols()
            )));
        }
        if let Err(e) = protos.ensure_finite("prototypes") {
            return Err(Error::data(e.to_string()));
        }
        let mut index = HashMap::with_capacity(class_ids.len());
        for (j, c) in class_ids.iter().enumerate() {
            if index.insert(c.clone(), j).is_some() {
                return Err(Error::data(format!("duplicate prototype for class '{c}'")));
            }
        }
        Ok(PrototypeSet {
            class_ids,
            protos,
            index,
        })
    }

    pub fn class_ids(&self) -> &[ClassId] {
        &self.class_ids
    }

    pub fn protos(&self) -> &Matrix {
        &self.protos
    }

    /// Semantic dimension k.
    pub fn dim(&self) -> usize {
        self.protos.rows()
    }

    pub fn len(&self) -> usize {
        self.class_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_ids.is_empty()
    }

    pub fn index_of(&self, class: &ClassId) -> Option<usize> {
        self.index.get(class).copied()
    }

    pub fn get(&self, class: &ClassId) -> Option<&[f64]> {
        self.index_of(class).map(|j| self.protos.column(j))
    }

    /// The prototypes of `classes`, in that order.
    pub fn select(&self, classes: &[ClassId]) -> Result<PrototypeSet> {
        let idx = self.indices(classes)?;
        PrototypeSet::new(classes.to_vec(), self.protos.select_columns(&idx))
    }

    /// k×N matrix whose column i is the prototype of `labels[i]`.
    pub fn per_sample(&self, labels: &[ClassId]) -> Result<Matrix> {
        Ok(self.protos.select_columns(&self.indices(labels)?))
    }

    fn indices(&self, classes: &[ClassId]) -> Result<Vec<usize>> {
        classes
            .iter()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| Error::data(format!("class '{c}' has no prototype")))
            })
            .collect()
    }
}

/// Distance used for nearest-prototype search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    /// `1 − cos`; a zero vector has cosine 0 to everything.
    #[default]
    Cosine,
    Euclidean,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::Cosine => "cosine",
            DistanceKind::Euclidean => "euclidean",
        })
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(DistanceKind::Cosine),
            "euclidean" => Ok(DistanceKind::Euclidean),
            other => Err(Error::invalid(format!("unknown distance '{other}'"))),
        }
    }
}

/// Which space the nearest-prototype search runs in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Encode samples with `W`, compare against semantic prototypes.
    #[default]
    Encoder,
    /// Decode prototypes with `Wᵀ`, compare against raw samples.
    Decoder,
}

impl Direction {
    /// Row label mirroring the two strategies of the original evaluation.
    pub fn row_label(self) -> &'static str {
        match self {
            Direction::Encoder => "SAE (W)",
            Direction::Decoder => "SAE (Wᵀ)",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Encoder => "encoder",
            Direction::Decoder => "decoder",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encoder" => Ok(Direction::Encoder),
            "decoder" => Ok(Direction::Decoder),
            other => Err(Error::invalid(format!("unknown direction '{other}'"))),
        }
    }
}

/// u×M matrix of distances from each query column to each target column.
pub fn pairwise_distances(targets: &Matrix, queries: &Matrix, kind: DistanceKind) -> Result<Matrix> {
    if targets.rows() != queries.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "pairwise_distances",
            left: targets.shape(),
            right: queries.shape(),
        }
        .into());
    }
    let (u, m) = (targets.cols(), queries.cols());
    let mut out = Matrix::zeros(u, m);
    match kind {
        DistanceKind::Cosine => {
            let t = l2_normalize_columns(targets);
            let q = l2_normalize_columns(queries);
            for i in 0..m {
                let qi = q.column(i);
                for (j, d) in out.column_mut(i).iter_mut().enumerate() {
                    *d = 1.0 - dot(t.column(j), qi);
                }
            }
        }
        DistanceKind::Euclidean => {
            for i in 0..m {
                let qi = queries.column(i);
                for (j, d) in out.column_mut(i).iter_mut().enumerate() {
                    let tj = targets.column(j);
                    *d = tj.iter().zip(qi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                }
            }
        }
    }
    Ok(out)
}

fn distances<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    protos: &PrototypeSet,
    dist: DistanceKind,
    direction: Direction,
) -> Result<Matrix> {
    if protos.is_empty() {
        return Err(Error::invalid("prototype set is empty"));
    }
    let w = model.weights();
    if protos.dim() != w.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "prototypes",
            left: w.shape(),
            right: protos.protos().shape(),
        }
        .into());
    }
    match direction {
        Direction::Encoder => pairwise_distances(protos.protos(), &model.encode(x_test)?, dist),
        Direction::Decoder => {
            if x_test.rows() != w.cols() {
                return Err(LinalgError::DimensionMismatch {
                    op: "decoder route",
                    left: w.shape(),
                    right: x_test.shape(),
                }
                .into());
            }
            pairwise_distances(&model.decode(protos.protos())?, x_test, dist)
        }
    }
}

/// Scores (negated distances) of every prototype for every test sample.
pub fn score_matrix<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    protos: &PrototypeSet,
    dist: DistanceKind,
    direction: Direction,
) -> Result<Matrix> {
    Ok(distances(model, x_test, protos, dist, direction)?.map(|d| -d))
}

/// Index of the largest entry of each column; ties go to the lowest index.
pub fn argmax_columns(scores: &Matrix) -> Vec<usize> {
    scores
        .columns()
        .map(|col| {
            let mut best = 0;
            for (j, &v) in col.iter().enumerate().skip(1) {
                if v > col[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Nearest prototype for each test column.
pub fn classify<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    protos: &PrototypeSet,
    dist: DistanceKind,
    direction: Direction,
) -> Result<Vec<ClassId>> {
    let d = distances(model, x_test, protos, dist, direction)?;
    Ok(d.columns()
        .map(|col| {
            let mut best = 0;
            for (j, &v) in col.iter().enumerate().skip(1) {
                if v < col[best] {
                    best = j;
                }
            }
            protos.class_ids()[best].clone()
        })
        .collect())
}

/// Nearest prototype in the semantic space after encoding with `W`.
pub fn classify_encoder<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    protos: &PrototypeSet,
    dist: DistanceKind,
) -> Result<Vec<ClassId>> {
    classify(model, x_test, protos, dist, Direction::Encoder)
}

/// Nearest prototype in the feature space after decoding prototypes with `Wᵀ`.
pub fn classify_decoder<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    protos: &PrototypeSet,
    dist: DistanceKind,
) -> Result<Vec<ClassId>> {
    classify(model, x_test, protos, dist, Direction::Decoder)
}

/// Scores of `x_test` against the seen and the unseen prototypes.
pub fn gzsl_scores<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    semantics: &PrototypeSet,
    seen: &[ClassId],
    unseen: &[ClassId],
    dist: DistanceKind,
    direction: Direction,
) -> Result<GzslScores> {
    Ok(GzslScores {
        seen_ids: seen.to_vec(),
        seen_scores: score_matrix(model, x_test, &semantics.select(seen)?, dist, direction)?,
        unseen_ids: unseen.to_vec(),
        unseen_scores: score_matrix(model, x_test, &semantics.select(unseen)?, dist, direction)?,
    })
}

/// Route each method is naturally evaluated with: the forward ridge maps
/// features to semantics, the reverse ridge semantics to features.
pub fn natural_direction(method: Method) -> Direction {
    match method {
        Method::Sae | Method::RidgeForward => Direction::Encoder,
        Method::RidgeReverse => Direction::Decoder,
    }
}

/// Classifies `test` among its own classes and scores the predictions.
pub fn evaluate_zsl<P: Projection + ?Sized>(
    model: &P,
    test: &LabeledDataset,
    dist: DistanceKind,
    direction: Direction,
) -> Result<Accuracy> {
    let protos = test
        .semantics()
        .ok_or_else(|| Error::data(format!("dataset '{}' has no semantic vectors", test.name)))?
        .select(&test.classes())?;
    let pred = classify(model, test.features(), &protos, dist, direction)?;
    multiway_accuracy(&pred, test.labels())
}
