use serde::{Deserialize, Serialize};

use crate::data::{distinct_in_order, ClassId};
use crate::error::{Error, Result};
use crate::matlin::Matrix;
use crate::sae::Method;

use super::{classify, multiway_accuracy, Direction, DistanceKind, PrototypeSet};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_LAMBDA_GRID: [f64; 9] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    pub method: Method,
    pub direction: Direction,
    pub distance: DistanceKind,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
            method: Method::Sae,
            direction: Direction::Encoder,
            distance: DistanceKind::Cosine,
        }
    }
}

/// Mean held-out accuracy for one λ; `None` if fitting failed on any fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaScore {
    pub lambda: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best_lambda: f64,
    pub scores: Vec<LambdaScore>,
}

/// Class-wise cross-validation of λ.
///
/// Classes (in first-appearance order) are dealt round-robin into
/// `folds` groups; each group in turn plays the unseen classes while the
/// model is fitted on the rest. The grid is sorted and deduplicated; the
/// best mean accuracy wins and ties go to the smallest λ.
pub fn cross_validate_lambda(
    x: &Matrix,
    labels: &[ClassId],
    protos: &PrototypeSet,
    cfg: &CvConfig,
) -> Result<CvOutcome> {
    let mut grid = cfg.lambda_grid.clone();
    if grid.is_empty() {
        return Err(Error::invalid("λ grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::invalid(format!("λ grid entries must be positive, got {bad}")));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if cfg.folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if x.cols() != labels.len() {
        return Err(Error::data(format!("{} samples but {} labels", x.cols(), labels.len())));
    }
    let classes = distinct_in_order(labels);
    if classes.len() < 2 * cfg.folds {
        return Err(Error::data(format!(
            "{} classes are too few for {} class-wise folds (need {})",
            classes.len(),
            cfg.folds,
            2 * cfg.folds
        )));
    }

    struct Fold {
        train_x: Matrix,
        train_s: Matrix,
        test_x: Matrix,
        test_labels: Vec<ClassId>,
        test_protos: PrototypeSet,
    }
    let folds: Vec<Fold> = (0..cfg.folds)
        .map(|f| {
            let held: Vec<ClassId> = classes.iter().skip(f).step_by(cfg.folds).cloned().collect();
            let is_held = |c: &ClassId| held.contains(c);
            let train_idx: Vec<usize> = (0..labels.len()).filter(|&i| !is_held(&labels[i])).collect();
            let test_idx: Vec<usize> = (0..labels.len()).filter(|&i| is_held(&labels[i])).collect();
            let train_labels: Vec<ClassId> = train_idx.iter().map(|&i| labels[i].clone()).collect();
            Ok(Fold {
                train_x: x.select_columns(&train_idx),
                train_s: protos.per_sample(&train_labels)?,
                test_x: x.select_columns(&test_idx),
                test_labels: test_idx.iter().map(|&i| labels[i].clone()).collect(),
                test_protos: protos.select(&held)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut scores = Vec::with_capacity(grid.len());
    let mut first_error = None;
    for &lambda in &grid {
        let mut total = 0.0;
        let mut failed = false;
        for fold in &folds {
            let outcome = cfg.method.fit(&fold.train_x, &fold.train_s, lambda).and_then(|w| {
                let pred = classify(&w, &fold.test_x, &fold.test_protos, cfg.distance, cfg.direction)?;
                multiway_accuracy(&pred, &fold.test_labels)
            });
            match outcome {
                Ok(acc) => total += acc.overall,
                Err(e) => {
                    first_error.get_or_insert(e);
                    failed = true;
                    break;
                }
            }
        }
        scores.push(LambdaScore {
            lambda,
            accuracy: (!failed).then(|| total / folds.len() as f64),
        });
    }

    let mut best: Option<LambdaScore> = None;
    for s in &scores {
        if let Some(acc) = s.accuracy {
            if best.and_then(|b| b.accuracy).is_none_or(|b| acc > b) {
                best = Some(*s);
            }
        }
    }
    match best {
        Some(b) => Ok(CvOutcome {
            best_lambda: b.lambda,
            scores,
        }),
        None => Err(first_error.expect("every λ failed, so an error was recorded")),
    }
}
