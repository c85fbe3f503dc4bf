use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ClassId, LabeledDataset};
use crate::error::{Error, Result};
use crate::matlin::Matrix;

// Geometry of the 3-D benchmark. Class centers sit on a circle of radius
// CLASS_RADIUS in the xy-plane at CLASS_ANGLES_DEG; each class is split
// into two subclusters at z = ±SUBCLUSTER_OFFSET. Siblings are therefore
// 2·SUBCLUSTER_OFFSET = 6 apart while the nearest foreign subcluster (same
// z, neighbouring class) is CLASS_RADIUS·√3 ≈ 1.73 away, so raw Euclidean
// k-means prefers to group by height rather than by class.
pub const CLASS_RADIUS: f64 = 1.0;
pub const CLASS_ANGLES_DEG: [f64; 3] = [90.0, 210.0, 330.0];
pub const SUBCLUSTER_OFFSET: f64 = 3.0;
/// Isotropic standard deviation of every subcluster.
pub const SUBCLUSTER_SPREAD: f64 = 0.15;
/// Share of each class relocated into foreign subclusters in the noisy variant.
pub const DEFAULT_NOISE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    SameSize,
    DiffSizeNoisy,
}

impl SynthKind {
    pub const ALL: [SynthKind; 2] = [SynthKind::SameSize, SynthKind::DiffSizeNoisy];
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::SameSize => "same_size",
            SynthKind::DiffSizeNoisy => "diff_size_noisy",
        })
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "same_size" => Ok(SynthKind::SameSize),
            "diff_size_noisy" => Ok(SynthKind::DiffSizeNoisy),
            other => Err(Error::invalid(format!("unknown synthetic kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub sizes: [usize; 3],
    pub noise_fraction: f64,
}

impl SynthParams {
    pub fn for_kind(kind: SynthKind) -> Self {
        match kind {
            SynthKind::SameSize => SynthParams {
                sizes: [1000; 3],
                noise_fraction: 0.0,
            },
            SynthKind::DiffSizeNoisy => SynthParams {
                sizes: [1000, 2000, 4000],
                noise_fraction: DEFAULT_NOISE_FRACTION,
            },
        }
    }
}

/// The six subcluster centers, two per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SubclusterLayout {
    pub centers: [[f64; 3]; 6],
    /// Class of each subcluster; subclusters `2c` and `2c + 1` belong to class c.
    pub class_of: [usize; 6],
}

impl SubclusterLayout {
    pub fn standard() -> Self {
        let mut centers = [[0.0; 3]; 6];
        for (c, deg) in CLASS_ANGLES_DEG.iter().enumerate() {
            let (s, co) = deg.to_radians().sin_cos();
            for (h, z) in [SUBCLUSTER_OFFSET, -SUBCLUSTER_OFFSET].into_iter().enumerate() {
                centers[2 * c + h] = [CLASS_RADIUS * co, CLASS_RADIUS * s, z];
            }
        }
        SubclusterLayout {
            centers,
            class_of: [0, 0, 1, 1, 2, 2],
        }
    }

    pub fn sibling(&self, i: usize) -> usize {
        i ^ 1
    }
}

pub fn synth_generate(kind: SynthKind, seed: u64) -> LabeledDataset {
    synth_generate_with(kind, &SynthParams::for_kind(kind), seed)
        .expect("built-in parameters are valid")
}

/// Draws each class as two equal Gaussian subclusters, then moves
/// `round(noise_fraction · n_c)` samples of every class into randomly chosen
/// subclusters of other classes, keeping their labels.
pub fn synth_generate_with(kind: SynthKind, params: &SynthParams, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..1.0).contains(&params.noise_fraction) {
        return Err(Error::invalid(format!(
            "noise fraction must lie in [0, 1), got {}",
            params.noise_fraction
        )));
    }
    let layout = SubclusterLayout::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = params.sizes.iter().sum();
    let mut data = Vec::with_capacity(3 * total);
    let mut labels = Vec::with_capacity(total);

    let draw = |rng: &mut ChaCha8Rng, center: &[f64; 3], out: &mut Vec<f64>| {
        for &m in center {
            out.push(m + SUBCLUSTER_SPREAD * rng.sample::<f64, _>(StandardNormal));
        }
    };

    for (c, &n) in params.sizes.iter().enumerate() {
        let start = data.len() / 3;
        for i in 0..n {
            let sub = 2 * c + usize::from(i >= n / 2);
            draw(&mut rng, &layout.centers[sub], &mut data);
            labels.push(ClassId::from(c));
        }
        let noisy = (params.noise_fraction * n as f64).round() as usize;
        if noisy > 0 {
            let foreign: Vec<usize> = (0..6).filter(|&s| layout.class_of[s] != c).collect();
            let mut idx: Vec<usize> = (start..start + n).collect();
            idx.shuffle(&mut rng);
            for &i in &idx[..noisy] {
                let sub = *foreign.choose(&mut rng).expect("three classes");
                let mut point = Vec::with_capacity(3);
                draw(&mut rng, &layout.centers[sub], &mut point);
                data[3 * i..3 * i + 3].copy_from_slice(&point);
            }
        }
    }
    LabeledDataset::new(
        format!("synth-{kind}-{seed}"),
        Matrix::from_col_major(3, total, data)?,
        labels,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(ds: &LabeledDataset) -> Vec<usize> {
        let counts = ds.class_counts();
        (0..3usize).map(|c| counts[&ClassId::from(c)]).collect()
    }

    #[test]
    fn same_size_shape() {
        let ds = synth_generate(SynthKind::SameSize, 1);
        assert_eq!(ds.len(), 3000);
        assert_eq!(ds.dim(), 3);
        assert_eq!(sizes(&ds), vec![1000, 1000, 1000]);
    }

    #[test]
    fn diff_size_shape() {
        let ds = synth_generate(SynthKind::DiffSizeNoisy, 1);
        assert_eq!(sizes(&ds), vec![1000, 2000, 4000]);
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in SynthKind::ALL {
            assert_eq!(synth_generate(kind, 9), synth_generate(kind, 9));
            assert_ne!(synth_generate(kind, 9), synth_generate(kind, 10));
        }
    }

    #[test]
    fn foreign_subcluster_is_nearer_than_sibling() {
        let l = SubclusterLayout::standard();
        let dist = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        for i in 0..6 {
            let sibling = dist(&l.centers[i], &l.centers[l.sibling(i)]);
            let foreign = (0..6)
                .filter(|&j| l.class_of[j] != l.class_of[i])
                .map(|j| dist(&l.centers[i], &l.centers[j]))
                .fold(f64::INFINITY, f64::min);
            assert!(foreign < sibling, "subcluster {i}: {foreign} vs {sibling}");
        }
    }

    #[test]
    fn kind_names() {
        assert_eq!("diff-size-noisy".parse::<SynthKind>().unwrap(), SynthKind::DiffSizeNoisy);
        assert_eq!(SynthKind::SameSize.to_string(), "same_size");
    }
}
