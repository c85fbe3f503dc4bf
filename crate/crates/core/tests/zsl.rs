mod common;

use common::{randn, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use sae_zsl::matlin::{dot, norm2, Matrix};
use sae_zsl::sae::{train_sae, TrainConfig};
use sae_zsl::zsl::{
    argmax_columns, ausuc, classify, cross_validate_lambda, gzsl_accuracy, hit_at_k, multiway_accuracy,
    score_matrix, CvConfig, Direction, DistanceKind, GzslScores, PrototypeSet,
};
use sae_zsl::{ClassId, Error};

fn ids(n: usize) -> Vec<ClassId> {
    (0..n).map(ClassId::from).collect()
}

/// Rows orthonormal, via Gram-Schmidt on a random k×d matrix.
fn orthonormal_rows(r: &mut impl Rng, k: usize, d: usize) -> Matrix {
    let g = randn(r, k, d);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        let mut v = g.row(i);
        for u in &rows {
            let p = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n = norm2(&v);
        v.iter_mut().for_each(|a| *a /= n);
        rows.push(v);
    }
    Matrix::from_rows(&rows)
}

fn brute_force_nearest(query: &[f64], targets: &Matrix, kind: DistanceKind) -> usize {
    let dist = |t: &[f64]| match kind {
        DistanceKind::Euclidean => t.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
        DistanceKind::Cosine => 1.0 - dot(t, query) / (norm2(t) * norm2(query)),
    };
    let mut best = 0;
    for j in 1..targets.cols() {
        if dist(targets.column(j)) < dist(targets.column(best)) {
            best = j;
        }
    }
    best
}

struct Orthonormal {
    w: Matrix,
    protos: PrototypeSet,
    x: Matrix,
    truth: Vec<ClassId>,
}

/// Three orthonormal prototypes; sample m of class c is `a_m · Wᵀ p_c`.
fn orthonormal_task(seed: u64) -> Orthonormal {
    let mut r = rng(seed);
    let (k, d) = (3, 7);
    let w = orthonormal_rows(&mut r, k, d);
    let protos = PrototypeSet::new(ids(3), orthonormal_rows(&mut r, 3, k).transpose()).unwrap();
    let mut cols = Vec::new();
    let mut truth = Vec::new();
    for m in 0..30 {
        let c = m % 3;
        let a = r.random_range(0.5..3.0);
        let x = w.t_matmul(&Matrix::from_columns(k, &[protos.protos().column(c)]).unwrap()).unwrap();
        cols.push(x.column(0).iter().map(|v| a * v).collect::<Vec<_>>());
        truth.push(ClassId::from(c));
    }
    Orthonormal {
        x: Matrix::from_columns(d, &cols).unwrap(),
        w,
        protos,
        truth,
    }
}

#[test]
fn encoded_sample_equal_to_prototype_is_that_class() {
    let protos = PrototypeSet::new(ids(3), Matrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 1.0, 2.0]])).unwrap();
    let w = Matrix::identity(2);
    let x = Matrix::from_rows(&[[2.0], [2.0]]);
    for kind in [DistanceKind::Cosine, DistanceKind::Euclidean] {
        for dir in [Direction::Encoder, Direction::Decoder] {
            assert_eq!(classify(&w, &x, &protos, kind, dir).unwrap(), vec![ClassId::from(2)]);
        }
    }
}

#[test]
fn ties_go_to_the_lowest_index() {
    let protos = PrototypeSet::new(ids(2), Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]])).unwrap();
    let x = Matrix::from_rows(&[[1.0], [1.0]]);
    for kind in [DistanceKind::Cosine, DistanceKind::Euclidean] {
        for dir in [Direction::Encoder, Direction::Decoder] {
            let pred = classify(&Matrix::identity(2), &x, &protos, kind, dir).unwrap();
            assert_eq!(pred, vec![ClassId::from(0)]);
        }
    }
}

#[test]
fn empty_prototypes_and_shape_mismatch_are_errors() {
    let empty = PrototypeSet::new(vec![], Matrix::zeros(2, 0)).unwrap();
    let x = Matrix::zeros(2, 1);
    assert!(matches!(
        classify(&Matrix::identity(2), &x, &empty, DistanceKind::Cosine, Direction::Encoder),
        Err(Error::InvalidArgument(_))
    ));
    let protos = PrototypeSet::new(ids(1), Matrix::zeros(3, 1)).unwrap();
    assert!(classify(&Matrix::identity(2), &x, &protos, DistanceKind::Cosine, Direction::Encoder).is_err());
    assert!(classify(&Matrix::identity(2), &Matrix::zeros(3, 1), &protos, DistanceKind::Cosine, Direction::Decoder).is_err());
}

#[test]
fn orthonormal_construction_is_classified_perfectly_on_both_routes() {
    for seed in 0..5 {
        let t = orthonormal_task(seed);
        for kind in [DistanceKind::Cosine, DistanceKind::Euclidean] {
            let enc = classify(&t.w, &t.x, &t.protos, kind, Direction::Encoder).unwrap();
            let dec = classify(&t.w, &t.x, &t.protos, kind, Direction::Decoder).unwrap();
            assert_eq!(enc, dec);
            if kind == DistanceKind::Cosine {
                assert_eq!(enc, t.truth);
            }
            let encoded = t.w.matmul(&t.x).unwrap();
            let decoded = t.w.t_matmul(t.protos.protos()).unwrap();
            for m in 0..t.x.cols() {
                let oracle = brute_force_nearest(encoded.column(m), t.protos.protos(), kind);
                assert_eq!(enc[m], t.protos.class_ids()[oracle]);
                let oracle = brute_force_nearest(t.x.column(m), &decoded, kind);
                assert_eq!(dec[m], t.protos.class_ids()[oracle]);
            }
        }
    }
}

#[test]
fn single_prototype_gives_one_row() {
    let protos = PrototypeSet::new(vec!["only".into()], Matrix::from_rows(&[[1.0], [2.0]])).unwrap();
    let mut r = rng(3);
    let x = randn(&mut r, 2, 5);
    let s = score_matrix(&Matrix::identity(2), &x, &protos, DistanceKind::Cosine, Direction::Encoder).unwrap();
    assert_eq!(s.shape(), (1, 5));
    let pred = classify(&Matrix::identity(2), &x, &protos, DistanceKind::Cosine, Direction::Encoder).unwrap();
    assert!(pred.iter().all(|c| c.as_str() == "only"));
}

#[test]
fn argmax_of_scores_reproduces_the_classifier() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (k, d, u, m) = (4, 9, 6, 25);
        let w = randn(&mut r, k, d);
        let x = randn(&mut r, d, m);
        let protos = PrototypeSet::new(ids(u), randn(&mut r, k, u)).unwrap();
        for kind in [DistanceKind::Cosine, DistanceKind::Euclidean] {
            for dir in [Direction::Encoder, Direction::Decoder] {
                let scores = score_matrix(&w, &x, &protos, kind, dir).unwrap();
                let pred = classify(&w, &x, &protos, kind, dir).unwrap();
                let via_scores: Vec<ClassId> = argmax_columns(&scores)
                    .into_iter()
                    .map(|j| protos.class_ids()[j].clone())
                    .collect();
                assert_eq!(pred, via_scores);
            }
        }
    }
}

#[test]
fn permuting_prototypes_permutes_score_rows() {
    let mut r = rng(5);
    let (k, d, u) = (3, 5, 5);
    let w = randn(&mut r, k, d);
    let x = randn(&mut r, d, 8);
    let protos = PrototypeSet::new(ids(u), randn(&mut r, k, u)).unwrap();
    let mut perm: Vec<usize> = (0..u).collect();
    perm.shuffle(&mut r);
    let permuted = PrototypeSet::new(
        perm.iter().map(|&j| protos.class_ids()[j].clone()).collect(),
        protos.protos().select_columns(&perm),
    )
    .unwrap();
    for dir in [Direction::Encoder, Direction::Decoder] {
        let a = score_matrix(&w, &x, &protos, DistanceKind::Euclidean, dir).unwrap();
        let b = score_matrix(&w, &x, &permuted, DistanceKind::Euclidean, dir).unwrap();
        for (row, &j) in perm.iter().enumerate() {
            assert_eq!(b.row(row), a.row(j));
        }
    }
}

#[test]
fn cosine_predictions_ignore_common_positive_scaling() {
    let mut r = rng(8);
    let (k, d, u) = (4, 6, 5);
    let w = randn(&mut r, k, d);
    let x = randn(&mut r, d, 40);
    let p = randn(&mut r, k, u);
    let base = PrototypeSet::new(ids(u), p.clone()).unwrap();
    let base_pred = classify(&w, &x, &base, DistanceKind::Cosine, Direction::Encoder).unwrap();
    for c in [1e-3, 0.5, 7.0, 1e4] {
        let scaled = PrototypeSet::new(ids(u), p.scale(c)).unwrap();
        let pred = classify(&w.scale(c), &x, &scaled, DistanceKind::Cosine, Direction::Encoder).unwrap();
        assert_eq!(pred, base_pred);
    }
}

/// Scores with the true class of sample m ranked `ranks[m]` (1-based).
fn ranked_scores(u: usize, ranks: &[usize]) -> (Matrix, Vec<ClassId>) {
    let mut cols = Vec::new();
    let mut truth = Vec::new();
    for (m, &rank) in ranks.iter().enumerate() {
        let t = m % u;
        // every other class gets a distinct score; the true class is inserted
        // so exactly rank − 1 classes beat it
        let mut col = vec![0.0; u];
        let others: Vec<usize> = (0..u).filter(|&j| j != t).collect();
        for (pos, &j) in others.iter().enumerate() {
            col[j] = (u - pos) as f64;
        }
        col[t] = (u - rank + 1) as f64 + 0.5;
        cols.push(col);
        truth.push(ClassId::from(t));
    }
    (Matrix::from_columns(u, &cols).unwrap(), truth)
}

/// Brute-force hit@k: count strictly better classes, plus tied classes with
/// a lower index.
fn hit_oracle(scores: &Matrix, truth: &[ClassId], classes: &[ClassId], k: usize) -> f64 {
    let mut hits = 0;
    for (m, t) in truth.iter().enumerate() {
        let ti = classes.iter().position(|c| c == t).unwrap();
        let col = scores.column(m);
        let ahead = (0..col.len())
            .filter(|&j| col[j] > col[ti] || (col[j] == col[ti] && j < ti))
            .count();
        if ahead < k {
            hits += 1;
        }
    }
    hits as f64 / truth.len() as f64
}

#[test]
fn hit_at_k_rank_cases() {
    let classes = ids(8);
    let (s, t) = ranked_scores(8, &[1]);
    assert_eq!(hit_at_k(&s, &classes, &t, 5).unwrap(), 1.0);
    let (s, t) = ranked_scores(8, &[6]);
    assert_eq!(hit_at_k(&s, &classes, &t, 5).unwrap(), 0.0);
    let (s, t) = ranked_scores(8, &[1, 3, 5, 7]);
    assert_eq!(hit_at_k(&s, &classes, &t, 5).unwrap(), 0.75);
    assert!(hit_at_k(&s, &classes, &[ClassId::from("zz")], 1).is_err());
    assert!(hit_at_k(&s, &classes, &t, 0).is_err());
}

#[test]
fn hit_at_k_is_monotone_and_complete_at_u() {
    let mut r = rng(21);
    let u = 7;
    let classes = ids(u);
    let scores = Matrix::from_fn(u, 50, |_, _| f64::from(r.random_range(0..4u8)));
    let truth: Vec<ClassId> = (0..50).map(|_| ClassId::from(r.random_range(0..u))).collect();
    let mut last = 0.0;
    for k in 1..=u {
        let h = hit_at_k(&scores, &classes, &truth, k).unwrap();
        assert_eq!(h, hit_oracle(&scores, &truth, &classes, k));
        assert!(h >= last);
        last = h;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn multiway_accuracy_cases() {
    let t = ids(4);
    assert_eq!(multiway_accuracy(&t, &t).unwrap().overall, 1.0);
    let wrong: Vec<ClassId> = (1..5).map(ClassId::from).collect();
    assert_eq!(multiway_accuracy(&wrong, &t).unwrap().overall, 0.0);
    let mut pred = t.clone();
    pred[2] = "x".into();
    assert_eq!(multiway_accuracy(&pred, &t).unwrap().overall, 0.75);
    assert!(multiway_accuracy(&pred[..3], &t).is_err());
}

#[test]
fn overall_accuracy_is_frequency_weighted_mean_of_per_class() {
    let mut r = rng(2);
    let truth: Vec<ClassId> = (0..60).map(|_| ClassId::from(r.random_range(0..5usize))).collect();
    let pred: Vec<ClassId> = truth
        .iter()
        .map(|t| if r.random_bool(0.6) { t.clone() } else { ClassId::from(9) })
        .collect();
    let acc = multiway_accuracy(&pred, &truth).unwrap();
    let mut weighted = 0.0;
    for (c, a) in &acc.per_class {
        let n = truth.iter().filter(|t| *t == c).count();
        weighted += a * n as f64;
    }
    assert!((weighted / truth.len() as f64 - acc.overall).abs() < 1e-12);
}

fn gzsl_fixture(r: &mut impl Rng, m: usize) -> (GzslScores, Vec<ClassId>, Vec<bool>) {
    let seen_ids: Vec<ClassId> = (0..3).map(|c| ClassId::from(format!("s{c}"))).collect();
    let unseen_ids: Vec<ClassId> = (0..2).map(|c| ClassId::from(format!("u{c}"))).collect();
    let mask: Vec<bool> = (0..m).map(|i| i % 2 == 0).collect();
    let truth = mask
        .iter()
        .map(|&s| {
            if s {
                seen_ids[r.random_range(0..3)].clone()
            } else {
                unseen_ids[r.random_range(0..2)].clone()
            }
        })
        .collect();
    let scores = GzslScores {
        seen_scores: randn(r, 3, m),
        unseen_scores: randn(r, 2, m),
        seen_ids,
        unseen_ids,
    };
    (scores, truth, mask)
}

#[test]
fn ausuc_is_a_fraction_and_ignores_constant_shifts() {
    let mut r = rng(4);
    for _ in 0..20 {
        let (scores, truth, mask) = gzsl_fixture(&mut r, 40);
        let base = ausuc(&scores, &truth, &mask, 200).unwrap();
        assert!((0.0..=1.0).contains(&base.area));
        let c = r.random_range(-50.0..50.0);
        let shifted = GzslScores {
            seen_scores: scores.seen_scores.map(|v| v + c),
            unseen_scores: scores.unseen_scores.map(|v| v + c),
            ..scores.clone()
        };
        let moved = ausuc(&shifted, &truth, &mask, 200).unwrap();
        assert!((moved.area - base.area).abs() < 1e-9, "{} vs {}", moved.area, base.area);
    }
}

#[test]
fn ausuc_curve_ends_at_the_extremes() {
    let mut r = rng(6);
    let (scores, truth, mask) = gzsl_fixture(&mut r, 30);
    let a = ausuc(&scores, &truth, &mask, 50).unwrap();
    assert_eq!(a.curve.len(), 50);
    let first = a.curve.first().unwrap();
    let last = a.curve.last().unwrap();
    // the sweep starts with everything predicted seen and ends with
    // everything predicted unseen
    assert_eq!(first.unseen_accuracy, 0.0);
    assert_eq!(last.seen_accuracy, 0.0);
    assert!(gzsl_accuracy(&scores, &truth, &mask, 0.0).is_ok());
}

#[test]
fn ausuc_needs_both_populations() {
    let mut r = rng(9);
    let (scores, truth, _) = gzsl_fixture(&mut r, 10);
    assert!(ausuc(&scores, &truth, &[true; 10], 200).is_err());
}

struct CvTask {
    x: Matrix,
    labels: Vec<ClassId>,
    protos: PrototypeSet,
}

/// Ten separable classes whose prototypes leave the last semantic
/// dimension at zero, so `S·Sᵀ` is singular. Features are scaled so that
/// `λ·X·Xᵀ` overflows for huge λ.
fn conditioning_task() -> CvTask {
    let mut r = rng(17);
    let (k, d, classes, per) = (4, 8, 10, 6);
    let mut p = randn(&mut r, k, classes);
    for c in 0..classes {
        p.column_mut(c)[k - 1] = 0.0;
    }
    let map = randn(&mut r, d, k);
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for c in 0..classes {
        for _ in 0..per {
            let clean = map.matmul(&Matrix::from_columns(k, &[p.column(c)]).unwrap()).unwrap();
            let noise = randn(&mut r, d, 1);
            cols.push(
                clean
                    .column(0)
                    .iter()
                    .zip(noise.column(0))
                    .map(|(a, b)| 1e6 * (a + 0.01 * b))
                    .collect::<Vec<_>>(),
            );
            labels.push(ClassId::from(c));
        }
    }
    CvTask {
        x: Matrix::from_columns(d, &cols).unwrap(),
        labels,
        protos: PrototypeSet::new(ids(classes), p).unwrap(),
    }
}

#[test]
fn single_grid_entry_is_returned() {
    let t = conditioning_task();
    let cfg = CvConfig {
        lambda_grid: vec![0.7],
        ..CvConfig::default()
    };
    let out = cross_validate_lambda(&t.x, &t.labels, &t.protos, &cfg).unwrap();
    assert_eq!(out.best_lambda, 0.7);
    assert_eq!(out.scores.len(), 1);
}

#[test]
fn duplicate_grid_entries_do_not_change_the_result() {
    let t = conditioning_task();
    let plain = CvConfig {
        lambda_grid: vec![0.1, 1.0, 10.0],
        ..CvConfig::default()
    };
    let dup = CvConfig {
        lambda_grid: vec![10.0, 1.0, 0.1, 1.0, 10.0],
        ..CvConfig::default()
    };
    let a = cross_validate_lambda(&t.x, &t.labels, &t.protos, &plain).unwrap();
    let b = cross_validate_lambda(&t.x, &t.labels, &t.protos, &dup).unwrap();
    assert_eq!(a, b);
}

#[test]
fn only_the_well_conditioned_lambda_survives() {
    let t = conditioning_task();
    let grid = [1e-300, 1.0, 1e300];
    let folds = 5;

    // exhaustive oracle: which λ trains on every class-wise fold
    let classes = ids(10);
    let solvable: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&lambda| {
            (0..folds).all(|f| {
                let held: Vec<&ClassId> = classes.iter().skip(f).step_by(folds).collect();
                let idx: Vec<usize> = (0..t.labels.len()).filter(|&i| !held.contains(&&t.labels[i])).collect();
                let labels: Vec<ClassId> = idx.iter().map(|&i| t.labels[i].clone()).collect();
                let s = t.protos.per_sample(&labels).unwrap();
                train_sae(&t.x.select_columns(&idx), &s, &TrainConfig::with_lambda(lambda)).is_ok()
            })
        })
        .collect();
    assert_eq!(solvable, vec![1.0]);

    let cfg = CvConfig {
        lambda_grid: grid.to_vec(),
        folds,
        ..CvConfig::default()
    };
    let out = cross_validate_lambda(&t.x, &t.labels, &t.protos, &cfg).unwrap();
    assert_eq!(out.best_lambda, 1.0);
    let failed: Vec<f64> = out.scores.iter().filter(|s| s.accuracy.is_none()).map(|s| s.lambda).collect();
    assert_eq!(failed, vec![1e-300, 1e300]);
    assert!(out.scores[1].accuracy.unwrap() > 0.9);
}

#[test]
fn cv_rejects_bad_grids_and_too_few_classes() {
    let t = conditioning_task();
    let with = |grid: Vec<f64>, folds| CvConfig {
        lambda_grid: grid,
        folds,
        ..CvConfig::default()
    };
    assert!(cross_validate_lambda(&t.x, &t.labels, &t.protos, &with(vec![], 5)).is_err());
    assert!(cross_validate_lambda(&t.x, &t.labels, &t.protos, &with(vec![-1.0], 5)).is_err());
    assert!(cross_validate_lambda(&t.x, &t.labels, &t.protos, &with(vec![1.0], 6)).is_err());
    assert!(cross_validate_lambda(&t.x, &t.labels, &t.protos, &with(vec![1.0], 1)).is_err());
}
