use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlin::Matrix;

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 1,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
        }
    }
}

/// Lowest-inertia result over all restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// dim × k, column j is the mean of cluster j.
    pub centroids: Matrix,
    pub inertia: f64,
    pub seed: u64,
    /// Index of the winning restart.
    pub restart: usize,
    pub iterations: usize,
    /// Inertia after each assignment step of the winning run.
    pub inertia_trace: Vec<f64>,
    /// Final inertia of every restart, in restart order.
    pub restart_inertias: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its squared distance; ties go to the lower index.
fn nearest(x: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, sq_dist(x, centroids.column(0)));
    for j in 1..centroids.cols() {
        let d = sq_dist(x, centroids.column(j));
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// k-means with k-means++ seeding and independent restarts.
///
/// Restart `r` draws from the ChaCha8 stream `r` of `seed`, so restarts
/// are independent of each other and of their evaluation order. Each run
/// iterates until the assignment stops changing or `max_iters` is hit.
/// A cluster left empty takes over the point farthest from its centroid.
pub fn kmeans(data: &Matrix, cfg: &KMeansConfig) -> Result<ClusterAssignment> {
    let n = data.cols();
    if cfg.k == 0 {
        return Err(Error::invalid("k-means needs k ≥ 1"));
    }
    if cfg.k > n {
        return Err(Error::invalid(format!("k = {} exceeds the {n} samples", cfg.k)));
    }
    if cfg.restarts == 0 {
        return Err(Error::invalid("k-means needs at least one restart"));
    }
    data.ensure_finite("kmeans")?;

    let mut best: Option<ClusterAssignment> = None;
    let mut inertias = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let run = lloyd(data, cfg.k, cfg.max_iters, plus_plus(data, cfg.k, &mut rng));
        inertias.push(run.inertia);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(ClusterAssignment {
                seed: cfg.seed,
                restart: r,
                ..run
            });
        }
    }
    let mut best = best.expect("at least one restart ran");
    best.restart_inertias = inertias;
    Ok(best)
}

fn plus_plus(data: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = data.cols();
    let mut centroids = Matrix::zeros(data.rows(), k);
    let first = rng.random_range(0..n);
    centroids.column_mut(0).copy_from_slice(data.column(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(data.column(i), centroids.column(0))).collect();
    for j in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.column_mut(j).copy_from_slice(data.column(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.column(i), centroids.column(j)));
        }
    }
    centroids
}

fn lloyd(data: &Matrix, k: usize, max_iters: usize, mut centroids: Matrix) -> ClusterAssignment {
    let (dim, n) = data.shape();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dist = vec![0.0; n];
        for i in 0..n {
            let (j, d) = nearest(data.column(i), &centroids);
            changed |= labels[i] != j;
            labels[i] = j;
            dist[i] = d;
            inertia += d;
        }
        trace.push(inertia);
        iterations += 1;
        if !changed {
            break;
        }

        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("k ≤ n leaves a cluster with two members");
            counts[labels[donor]] -= 1;
            counts[empty] = 1;
            labels[donor] = empty;
            dist[donor] = 0.0;
        }

        centroids = Matrix::zeros(dim, k);
        for (i, &l) in labels.iter().enumerate() {
            for (c, x) in centroids.column_mut(l).iter_mut().zip(data.column(i)) {
                *c += x;
            }
        }
        for (j, &c) in counts.iter().enumerate() {
            for v in centroids.column_mut(j) {
                *v /= c as f64;
            }
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(data.column(i), centroids.column(labels[i])))
        .sum();
    ClusterAssignment {
        labels,
        centroids,
        inertia,
        seed: 0,
        restart: 0,
        iterations,
        inertia_trace: trace,
        restart_inertias: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Matrix {
        Matrix::from_rows(&[values])
    }

    fn cfg(k: usize) -> KMeansConfig {
        KMeansConfig {
            k,
            ..KMeansConfig::default()
        }
    }

    #[test]
    fn two_groups_on_a_line() {
        let a = kmeans(&line(&[0.0, 1.0, 10.0, 11.0]), &cfg(2)).unwrap();
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
        assert_eq!(a.inertia, 1.0);
    }

    #[test]
    fn k_distinct_points_give_zero_inertia() {
        let a = kmeans(&line(&[3.0, 3.0, -1.0, 7.0, -1.0, 7.0]), &cfg(3)).unwrap();
        assert_eq!(a.inertia, 0.0);
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[4]);
        assert_eq!(a.labels[3], a.labels[5]);
    }

    #[test]
    fn single_cluster_centroid_is_the_mean() {
        let a = kmeans(&Matrix::from_rows(&[[1.0, 2.0, 6.0], [0.0, 3.0, 3.0]]), &cfg(1)).unwrap();
        assert_eq!(a.centroids.column(0), &[3.0, 2.0]);
        assert!(a.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn invalid_k() {
        assert!(kmeans(&line(&[1.0, 2.0]), &cfg(3)).is_err());
        assert!(kmeans(&line(&[1.0, 2.0]), &cfg(0)).is_err());
    }

    #[test]
    fn all_identical_points_still_fill_every_cluster() {
        let a = kmeans(&line(&[2.0; 5]), &cfg(3)).unwrap();
        assert_eq!(a.inertia, 0.0);
        assert!(a.labels.iter().all(|&l| l < 3));
    }
}
