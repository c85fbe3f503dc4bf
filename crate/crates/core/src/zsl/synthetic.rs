//! Seeded synthetic zero-shot task.
//!
//! Each class has a Gaussian semantic prototype. A sample draws a noisy
//! semantic vector around its prototype and maps it to feature space through
//! a shared linear map perturbed per class (so a projection learned on seen
//! classes transfers imperfectly), plus a low-rank shared nuisance and
//! isotropic feature noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{ClassId, LabeledDataset, SplitSpec, DEFAULT_GZSL_HOLDOUT};
use crate::error::Result;
use crate::matlin::Matrix;

use super::PrototypeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticZslConfig {
    pub seen_classes: usize,
    pub unseen_classes: usize,
    pub semantic_dim: usize,
    pub feature_dim: usize,
    pub samples_per_seen: usize,
    pub samples_per_unseen: usize,
    /// Std. dev. of per-sample semantic jitter around the prototype.
    pub semantic_noise: f64,
    /// Std. dev. of the per-class perturbation of the semantic→feature map.
    pub class_shift: f64,
    /// Scale and rank of the nuisance shared by all classes.
    pub nuisance: f64,
    pub nuisance_rank: usize,
    pub feature_noise: f64,
}

impl Default for SyntheticZslConfig {
    fn default() -> Self {
        SyntheticZslConfig {
            seen_classes: 10,
            unseen_classes: 4,
            semantic_dim: 8,
            feature_dim: 128,
            samples_per_seen: 10,
            samples_per_unseen: 200,
            semantic_noise: 0.1,
            class_shift: 0.2,
            nuisance: 2.0,
            nuisance_rank: 3,
            feature_noise: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticZslTask {
    pub dataset: LabeledDataset,
    pub split: SplitSpec,
}

pub fn class_name(c: usize) -> ClassId {
    ClassId::new(format!("c{c:02}"))
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Draws the task for `seed`. Seen classes come first in the label order.
pub fn generate(cfg: &SyntheticZslConfig, seed: u64) -> Result<SyntheticZslTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, d) = (cfg.semantic_dim, cfg.feature_dim);
    let n_classes = cfg.seen_classes + cfg.unseen_classes;

    let protos = gaussian(&mut rng, k, n_classes, 1.0);
    let base_map = gaussian(&mut rng, d, k, 1.0);
    let nuisance_map = gaussian(&mut rng, d, cfg.nuisance_rank, 1.0);

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n_classes {
        let n = if c < cfg.seen_classes {
            cfg.samples_per_seen
        } else {
            cfg.samples_per_unseen
        };
        let map = base_map.add(&gaussian(&mut rng, d, k, cfg.class_shift))?;
        let mut s = gaussian(&mut rng, k, n, cfg.semantic_noise);
        for j in 0..n {
            for (v, p) in s.column_mut(j).iter_mut().zip(protos.column(c)) {
                *v += p;
            }
        }
        let z = gaussian(&mut rng, cfg.nuisance_rank, n, cfg.nuisance);
        let noise = gaussian(&mut rng, d, n, cfg.feature_noise);
        let x = map.matmul(&s)?.add(&nuisance_map.matmul(&z)?)?.add(&noise)?;
        columns.extend(x.columns().map(<[f64]>::to_vec));
        labels.extend(std::iter::repeat_n(class_name(c), n));
    }

    let ids: Vec<ClassId> = (0..n_classes).map(class_name).collect();
    let semantics = PrototypeSet::new(ids.clone(), protos)?;
    let features = Matrix::from_columns(d, &columns)?;
    let dataset = LabeledDataset::new(format!("synthetic-zsl-{seed}"), features, labels, Some(semantics))?;
    let split = SplitSpec::new(
        ids[..cfg.seen_classes].to_vec(),
        ids[cfg.seen_classes..].to_vec(),
        Some(DEFAULT_GZSL_HOLDOUT),
    )?;
    Ok(SyntheticZslTask { dataset, split })
}
