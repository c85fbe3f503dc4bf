use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::ClassId;
use crate::error::{Error, Result};
use crate::matlin::Matrix;

use super::argmax_columns;

pub const DEFAULT_GAMMA_GRID: usize = 200;

fn class_index(class_ids: &[ClassId]) -> HashMap<&ClassId, usize> {
    class_ids.iter().enumerate().map(|(j, c)| (c, j)).collect()
}

/// Fraction of samples whose true class is among the `k` best-scored
/// classes. Among equal scores the lower class index ranks first.
pub fn hit_at_k(scores: &Matrix, class_ids: &[ClassId], true_ids: &[ClassId], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("hit@k needs k ≥ 1"));
    }
    if scores.rows() != class_ids.len() || scores.cols() != true_ids.len() {
        return Err(Error::invalid(format!(
            "score matrix is {}×{} for {} classes and {} samples",
            scores.rows(),
            scores.cols(),
            class_ids.len(),
            true_ids.len()
        )));
    }
    if true_ids.is_empty() {
        return Err(Error::invalid("hit@k of an empty test set"));
    }
    let index = class_index(class_ids);
    let mut hits = 0usize;
    for (col, truth) in scores.columns().zip(true_ids) {
        let t = *index
            .get(truth)
            .ok_or_else(|| Error::data(format!("true class '{truth}' is not among the scored classes")))?;
        let rank = col
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v > col[t] || (v == col[t] && j < t))
            .count();
        if rank < k {
            hits += 1;
        }
    }
    Ok(hits as f64 / true_ids.len() as f64)
}

/// Sample-level accuracy with its per-class breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub overall: f64,
    pub mean_per_class: f64,
    pub per_class: BTreeMap<ClassId, f64>,
}

pub fn multiway_accuracy(pred: &[ClassId], truth: &[ClassId]) -> Result<Accuracy> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("accuracy of an empty test set"));
    }
    let mut tally: BTreeMap<ClassId, (usize, usize)> = BTreeMap::new();
    let mut correct = 0usize;
    for (p, t) in pred.iter().zip(truth) {
        let e = tally.entry(t.clone()).or_default();
        e.1 += 1;
        if p == t {
            e.0 += 1;
            correct += 1;
        }
    }
    let per_class: BTreeMap<ClassId, f64> = tally
        .into_iter()
        .map(|(c, (ok, n))| (c, ok as f64 / n as f64))
        .collect();
    let mean_per_class = per_class.values().sum::<f64>() / per_class.len() as f64;
    Ok(Accuracy {
        overall: correct as f64 / truth.len() as f64,
        mean_per_class,
        per_class,
    })
}

/// Scores of a mixed test set against seen and unseen classes separately.
#[derive(Debug, Clone, PartialEq)]
pub struct GzslScores {
    pub seen_ids: Vec<ClassId>,
    pub seen_scores: Matrix,
    pub unseen_ids: Vec<ClassId>,
    pub unseen_scores: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gamma: f64,
    pub seen_accuracy: f64,
    pub unseen_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ausuc {
    pub area: f64,
    pub curve: Vec<CurvePoint>,
}

/// Per-sample best seen and unseen classes of a mixed test set.
struct Prepared {
    seen_mask: Vec<bool>,
    truth: Vec<usize>,
    best_seen: Vec<usize>,
    best_unseen: Vec<usize>,
    top_seen: Vec<f64>,
    top_unseen: Vec<f64>,
    n_seen: usize,
    n_unseen: usize,
}

impl Prepared {
    fn new(scores: &GzslScores, true_ids: &[ClassId], seen_mask: &[bool]) -> Result<Self> {
        let m = true_ids.len();
        let GzslScores {
            seen_ids,
            seen_scores,
            unseen_ids,
            unseen_scores,
        } = scores;
        if seen_scores.shape() != (seen_ids.len(), m) || unseen_scores.shape() != (unseen_ids.len(), m) {
            return Err(Error::invalid("score matrices do not match class and sample counts"));
        }
        if seen_mask.len() != m {
            return Err(Error::invalid("seen mask length differs from sample count"));
        }
        if seen_ids.is_empty() || unseen_ids.is_empty() {
            return Err(Error::invalid("generalized evaluation needs both seen and unseen classes"));
        }
        let n_seen = seen_mask.iter().filter(|&&s| s).count();
        let n_unseen = m - n_seen;
        if n_seen == 0 || n_unseen == 0 {
            return Err(Error::data("mixed test set lacks seen or unseen samples"));
        }

        let seen_index = class_index(seen_ids);
        let unseen_index = class_index(unseen_ids);
        let truth: Vec<usize> = true_ids
            .iter()
            .zip(seen_mask)
            .map(|(c, &is_seen)| {
                let idx = if is_seen { &seen_index } else { &unseen_index };
                idx.get(c).copied().ok_or_else(|| {
                    let role = if is_seen { "seen" } else { "unseen" };
                    Error::data(format!("sample of class '{c}' is marked {role} but has no {role} score row"))
                })
            })
            .collect::<Result<_>>()?;

        let best_seen = argmax_columns(seen_scores);
        let best_unseen = argmax_columns(unseen_scores);
        let top_seen = (0..m).map(|i| seen_scores[(best_seen[i], i)]).collect();
        let top_unseen = (0..m).map(|i| unseen_scores[(best_unseen[i], i)]).collect();
        Ok(Prepared {
            seen_mask: seen_mask.to_vec(),
            truth,
            best_seen,
            best_unseen,
            top_seen,
            top_unseen,
            n_seen,
            n_unseen,
        })
    }

    fn at(&self, gamma: f64) -> CurvePoint {
        let (mut ok_seen, mut ok_unseen) = (0usize, 0usize);
        for i in 0..self.truth.len() {
            let predicted_seen = self.top_seen[i] - gamma >= self.top_unseen[i];
            if self.seen_mask[i] {
                if predicted_seen && self.best_seen[i] == self.truth[i] {
                    ok_seen += 1;
                }
            } else if !predicted_seen && self.best_unseen[i] == self.truth[i] {
                ok_unseen += 1;
            }
        }
        CurvePoint {
            gamma,
            seen_accuracy: ok_seen as f64 / self.n_seen as f64,
            unseen_accuracy: ok_unseen as f64 / self.n_unseen as f64,
        }
    }
}

/// Seen- and unseen-sample accuracy over the union of all classes after
/// subtracting `gamma` from every seen-class score. Seen classes win ties.
pub fn gzsl_accuracy(scores: &GzslScores, true_ids: &[ClassId], seen_mask: &[bool], gamma: f64) -> Result<CurvePoint> {
    Ok(Prepared::new(scores, true_ids, seen_mask)?.at(gamma))
}

/// Area under the seen/unseen accuracy curve traced by subtracting a
/// calibration offset γ from every seen-class score.
///
/// γ takes `gamma_grid` evenly spaced values spanning the per-sample gaps
/// `max seen score − max unseen score`, widened by 10% on each side, so the
/// sweep runs from "everything predicted seen" to "everything predicted
/// unseen". Accuracies are per sample; the area is the trapezoid rule over
/// unseen accuracy.
pub fn ausuc(scores: &GzslScores, true_ids: &[ClassId], seen_mask: &[bool], gamma_grid: usize) -> Result<Ausuc> {
    if gamma_grid < 2 {
        return Err(Error::invalid("AUSUC needs a γ grid of at least 2 points"));
    }
    let p = Prepared::new(scores, true_ids, seen_mask)?;
    let gaps = p.top_seen.iter().zip(&p.top_unseen).map(|(s, u)| s - u);
    let (lo, hi) = gaps.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)));
    let margin = if hi > lo { 0.1 * (hi - lo) } else { 1.0 };
    let (lo, hi) = (lo - margin, hi + margin);

    let curve: Vec<CurvePoint> = (0..gamma_grid)
        .map(|step| p.at(lo + (hi - lo) * step as f64 / (gamma_grid - 1) as f64))
        .collect();
    let area = curve
        .windows(2)
        .map(|w| (w[1].unseen_accuracy - w[0].unseen_accuracy) * (w[0].seen_accuracy + w[1].seen_accuracy) / 2.0)
        .sum::<f64>();
    Ok(Ausuc { area, curve })
}
