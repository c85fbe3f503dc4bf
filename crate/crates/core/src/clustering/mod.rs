//! Supervised clustering: learn a projection into a normalized one-hot
//! label space, then run k-means on projected test data.

mod kmeans;
mod synth;

pub use kmeans::{kmeans, ClusterAssignment, KMeansConfig, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
pub use synth::{
    synth_generate, synth_generate_with, SubclusterLayout, SynthKind, SynthParams, CLASS_ANGLES_DEG, CLASS_RADIUS,
    DEFAULT_NOISE_FRACTION, SUBCLUSTER_OFFSET, SUBCLUSTER_SPREAD,
};

use std::collections::HashMap;
use std::hash::Hash;
use std::path::Path;

use crate::data::{distinct_in_order, ClassId};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::matlin::Matrix;
use crate::sae::{train_sae, Projection, TrainConfig};

use serde::{Deserialize, Serialize};

/// Count-normalized one-hot labels: sample i of class c has the single
/// nonzero entry `1/√n_c` in row c, so every row has unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEncoding {
    pub class_ids: Vec<ClassId>,
    pub s_matrix: Matrix,
}

/// Classes are ordered by first appearance.
pub fn encode_labels(labels: &[ClassId]) -> Result<LabelEncoding> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot encode an empty label list"));
    }
    let class_ids = distinct_in_order(labels);
    let row: HashMap<&ClassId, usize> = class_ids.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut counts = vec![0usize; class_ids.len()];
    for l in labels {
        counts[row[l]] += 1;
    }
    let mut s = Matrix::zeros(class_ids.len(), labels.len());
    for (j, l) in labels.iter().enumerate() {
        let r = row[l];
        s.column_mut(j)[r] = 1.0 / (counts[r] as f64).sqrt();
    }
    Ok(LabelEncoding {
        class_ids,
        s_matrix: s,
    })
}

/// Encodes `x_test` with `W` and clusters the result.
pub fn project_and_cluster<P: Projection + ?Sized>(
    model: &P,
    x_test: &Matrix,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let projected = model.encode(x_test)?;
    kmeans(
        &projected,
        &KMeansConfig {
            k,
            restarts,
            seed,
            ..KMeansConfig::default()
        },
    )
}

/// `‖Ĉ − C‖²_F` between the normalized equivalence matrices of two
/// labelings, where entry (i, j) is `1/n_c` when i and j share a cluster
/// of size `n_c` and 0 otherwise.
///
/// Evaluated in O(N) from the contingency table,
/// `K + K̂ − 2 Σ_{c,c'} n_{cc'}² / (n_c n_c')`, in exact rational
/// arithmetic while it fits in 128 bits.
pub fn clustering_loss<A: Eq + Hash, B: Eq + Hash>(pred: &[A], truth: &[B]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predicted labels for {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("clustering loss of an empty labeling"));
    }
    fn ids<T: Eq + Hash>(labels: &[T]) -> (Vec<usize>, Vec<u128>) {
        let mut map = HashMap::new();
        let mut sizes = Vec::new();
        let idx = labels
            .iter()
            .map(|l| {
                let next = map.len();
                let i = *map.entry(l).or_insert(next);
                if i == sizes.len() {
                    sizes.push(0);
                }
                sizes[i] += 1;
                i
            })
            .collect();
        (idx, sizes)
    }
    let (p, p_sizes) = ids(pred);
    let (t, t_sizes) = ids(truth);
    let mut joint: HashMap<(usize, usize), u128> = HashMap::new();
    for (&a, &b) in p.iter().zip(&t) {
        *joint.entry((a, b)).or_insert(0) += 1;
    }
    let pairs: Vec<(u128, u128)> = joint
        .iter()
        .map(|(&(a, b), &n)| (n * n, p_sizes[a] * t_sizes[b]))
        .collect();
    let classes = (p_sizes.len() + t_sizes.len()) as u128;
    if let Some((num, den)) = exact_sum(&pairs) {
        // K + K̂ − 2·num/den as one correctly rounded division
        if let Some(top) = classes.checked_mul(den).and_then(|v| v.checked_sub(num.checked_mul(2)?)) {
            return Ok(top as f64 / den as f64);
        }
    }
    let mut cross: Vec<f64> = pairs.iter().map(|&(n, d)| n as f64 / d as f64).collect();
    cross.sort_by(f64::total_cmp);
    Ok((classes as f64 - 2.0 * cross.iter().sum::<f64>()).max(0.0))
}

/// `Σ n/d` as a reduced fraction, or `None` on overflow.
fn exact_sum(terms: &[(u128, u128)]) -> Option<(u128, u128)> {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let (mut num, mut den) = (0u128, 1u128);
    for &(n, d) in terms {
        let g = gcd(den, d);
        let lcm = (den / g).checked_mul(d)?;
        num = num.checked_mul(lcm / den)?.checked_add(n.checked_mul(lcm / d)?)?;
        den = lcm;
        let r = gcd(num, den);
        num /= r;
        den /= r;
    }
    Some((num, den))
}

/// Offset between the training and test seeds of the benchmark.
pub const TEST_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Δ of SAE projection + k-means against k-means on raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub kind: SynthKind,
    pub train_seed: u64,
    pub test_seed: u64,
    pub lambda: f64,
    pub sae_loss: f64,
    pub raw_loss: f64,
    pub sae_inertia: f64,
    pub raw_inertia: f64,
}

/// Trains on `synth_generate(kind, seed)` and clusters a noise-free draw
/// of the same geometry and class sizes.
pub fn run_benchmark(kind: SynthKind, seed: u64, lambda: f64, restarts: usize) -> Result<BenchmarkOutcome> {
    let train = synth_generate(kind, seed);
    let test_seed = seed.wrapping_add(TEST_SEED_OFFSET);
    let clean = SynthParams {
        noise_fraction: 0.0,
        ..SynthParams::for_kind(kind)
    };
    let test = synth_generate_with(kind, &clean, test_seed)?;

    let enc = encode_labels(train.labels())?;
    let model = train_sae(train.features(), &enc.s_matrix, &TrainConfig::with_lambda(lambda))?;
    let k = test.classes().len();
    let sae = project_and_cluster(&model, test.features(), k, restarts, seed)?;
    let raw = kmeans(
        test.features(),
        &KMeansConfig {
            k,
            restarts,
            seed,
            ..KMeansConfig::default()
        },
    )?;
    Ok(BenchmarkOutcome {
        kind,
        train_seed: seed,
        test_seed,
        lambda,
        sae_loss: clustering_loss(&sae.labels, test.labels())?,
        raw_loss: clustering_loss(&raw.labels, test.labels())?,
        sae_inertia: sae.inertia,
        raw_inertia: raw.inertia,
    })
}

/// Writes `sample_index,cluster_id` rows.
pub fn save_assignments_csv(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::from("sample_index,cluster_id\n");
    for (i, c) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{c}\n"));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<ClassId> {
        names.iter().map(|&s| s.into()).collect()
    }

    #[test]
    fn distinct_labels_encode_to_identity() {
        let e = encode_labels(&ids(&["a", "b", "c"])).unwrap();
        assert_eq!(e.s_matrix, Matrix::identity(3));
    }

    #[test]
    fn repeated_labels_are_count_normalized() {
        let e = encode_labels(&ids(&["a", "a", "b"])).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(e.s_matrix, Matrix::from_rows(&[[h, h, 0.0], [0.0, 0.0, 1.0]]));
        assert_eq!(e.class_ids, ids(&["a", "b"]));
        assert!(encode_labels(&[]).is_err());
    }

    #[test]
    fn duplicating_samples_halves_squared_entries() {
        let once = encode_labels(&ids(&["a", "b", "b"])).unwrap().s_matrix;
        let twice = encode_labels(&ids(&["a", "b", "b", "a", "b", "b"])).unwrap().s_matrix;
        for j in 0..3 {
            for i in 0..2 {
                let (x, y) = (once[(i, j)], twice[(i, j)]);
                assert!((y * y - x * x / 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn loss_hand_cases() {
        assert_eq!(clustering_loss(&[0, 0, 1], &[0, 1, 1]).unwrap(), 1.5);
        assert_eq!(clustering_loss(&[0, 0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(clustering_loss(&[5, 5, 2], &["x", "x", "y"]).unwrap(), 0.0);
        assert!(clustering_loss(&[0], &[0, 1]).is_err());
    }
}
