use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{ClassId, LabeledDataset, SplitSpec};

/// Fraction of seen-class samples held out for generalized evaluation.
pub const DEFAULT_GZSL_HOLDOUT: f64 = 0.2;

/// Seen-class training samples and unseen-class test samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ZslSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

/// Training set plus a mixed test set; `seen_mask[i]` tells whether test
/// sample `i` belongs to a seen class.
#[derive(Debug, Clone, PartialEq)]
pub struct GzslSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub seen_mask: Vec<bool>,
    /// Original dataset indices of the train and test samples.
    pub train_index: Vec<usize>,
    pub test_index: Vec<usize>,
}

fn require_present(dataset: &LabeledDataset, classes: &[ClassId], role: &str) -> Result<()> {
    let counts = dataset.class_counts();
    for c in classes {
        if !counts.contains_key(c) {
            return Err(Error::data(format!("{role} class '{c}' is absent from the dataset")));
        }
    }
    Ok(())
}

/// Conventional zero-shot split: train on every seen-class sample, test on
/// every unseen-class sample.
pub fn zsl_split(dataset: &LabeledDataset, spec: &SplitSpec) -> Result<ZslSplit> {
    spec.validate()?;
    require_present(dataset, &spec.seen, "seen")?;
    require_present(dataset, &spec.unseen, "unseen")?;
    let name = &dataset.name;
    Ok(ZslSplit {
        train: dataset.subset(&dataset.indices_of(&spec.seen), format!("{name}/train")),
        test: dataset.subset(&dataset.indices_of(&spec.unseen), format!("{name}/test")),
    })
}

/// Number of samples held out from a class of `n`: the rounded fraction,
/// at least one when `n > 1`, never the whole class.
pub(crate) fn holdout_count(n: usize, fraction: f64) -> usize {
    if n <= 1 {
        return 0;
    }
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Stratified holdout of `spec.gzsl_holdout` (default 0.2) of every seen
/// class, mixed with all unseen-class samples. Both outputs keep the
/// original sample order.
pub fn gzsl_split(dataset: &LabeledDataset, spec: &SplitSpec, seed: u64) -> Result<GzslSplit> {
    spec.validate()?;
    require_present(dataset, &spec.seen, "seen")?;
    require_present(dataset, &spec.unseen, "unseen")?;
    let fraction = spec.gzsl_holdout.unwrap_or(DEFAULT_GZSL_HOLDOUT);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut role = vec![None::<bool>; dataset.len()]; // Some(true) train, Some(false) test
    for class in &spec.seen {
        let mut idx = dataset.indices_of(std::slice::from_ref(class));
        idx.shuffle(&mut rng);
        let h = holdout_count(idx.len(), fraction);
        for (pos, &i) in idx.iter().enumerate() {
            role[i] = Some(pos >= h);
        }
    }
    for i in dataset.indices_of(&spec.unseen) {
        role[i] = Some(false);
    }

    let train_index: Vec<usize> = (0..role.len()).filter(|&i| role[i] == Some(true)).collect();
    let test_index: Vec<usize> = (0..role.len()).filter(|&i| role[i] == Some(false)).collect();
    let seen: std::collections::HashSet<&ClassId> = spec.seen.iter().collect();
    let seen_mask = test_index
        .iter()
        .map(|&i| seen.contains(&dataset.labels()[i]))
        .collect();
    let name = &dataset.name;
    Ok(GzslSplit {
        train: dataset.subset(&train_index, format!("{name}/train")),
        test: dataset.subset(&test_index, format!("{name}/test")),
        seen_mask,
        train_index,
        test_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::Matrix;

    fn dataset(sizes: &[(&str, usize)]) -> LabeledDataset {
        let labels: Vec<ClassId> = sizes
            .iter()
            .flat_map(|&(c, n)| std::iter::repeat_n(ClassId::from(c), n))
            .collect();
        let n = labels.len();
        LabeledDataset::new("t", Matrix::from_fn(2, n, |i, j| (i * n + j) as f64), labels, None).unwrap()
    }

    #[test]
    fn holdout_counts() {
        assert_eq!(holdout_count(10, 0.2), 2);
        assert_eq!(holdout_count(1, 0.2), 0);
        assert_eq!(holdout_count(2, 0.2), 1);
        assert_eq!(holdout_count(3, 0.9), 2);
    }

    #[test]
    fn gzsl_split_partitions_and_is_deterministic() {
        let ds = dataset(&[("a", 10), ("b", 1), ("c", 7), ("u", 4)]);
        let spec = SplitSpec::new(vec!["a".into(), "b".into(), "c".into()], vec!["u".into()], None).unwrap();
        let s1 = gzsl_split(&ds, &spec, 3).unwrap();
        let s2 = gzsl_split(&ds, &spec, 3).unwrap();
        assert_eq!(s1, s2);

        let mut all: Vec<usize> = s1.train_index.iter().chain(&s1.test_index).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());

        let held = |c: &str| {
            s1.test.labels().iter().filter(|l| l.as_str() == c).count()
        };
        assert_eq!(held("a"), 2);
        assert_eq!(held("b"), 0);
        assert_eq!(held("c"), 1);
        assert_eq!(held("u"), 4);
        assert_eq!(s1.seen_mask.iter().filter(|&&m| !m).count(), 4);

        let other = gzsl_split(&ds, &spec, 4).unwrap();
        assert_eq!(other.test.len(), s1.test.len());
    }

    #[test]
    fn absent_unseen_class_is_an_error() {
        let ds = dataset(&[("a", 3)]);
        let spec = SplitSpec::new(vec!["a".into()], vec!["ghost".into()], None).unwrap();
        assert!(gzsl_split(&ds, &spec, 0).is_err());
        assert!(zsl_split(&ds, &spec).is_err());
    }
}
