mod common;

use approx::assert_abs_diff_eq;
use common::*;
use rand::Rng as _;
use ztids::classifiers::{best_split, fit_forest, fit_tree, ForestParams, TreeParams};
use ztids::metrics::{compute_metrics, confusion};
use ztids::rng;
use ztids::smote::{knn_minority, smote_resample, SmoteConfig};
use ztids::{Dataset, RowOrigin};

#[test]
fn best_split_matches_enumeration() {
    for seed in 0..100 {
        let ds = random_matrix(20, 3, 6, 2, seed);
        let rows: Vec<usize> = (0..20).collect();
        let fast = best_split(&ds, &rows, &[0, 1, 2]);
        let slow = brute_best_split(&ds, &rows, &[0, 1, 2]);
        match (fast, slow) {
            (None, None) => {}
            (Some(f), Some((feature, threshold, decrease))) => {
                assert_eq!(f.feature, feature, "seed {seed}");
                assert_eq!(f.threshold, threshold, "seed {seed}");
                assert_abs_diff_eq!(f.impurity_decrease, decrease, epsilon = 1e-9);
            }
            other => panic!("seed {seed}: {other:?}"),
        }
    }
}

#[test]
fn best_split_on_row_subsets() {
    for seed in 0..50 {
        let ds = random_matrix(40, 4, 10, 3, seed);
        let rows: Vec<usize> = (0..40).filter(|i| (i + seed as usize) % 3 != 0).collect();
        let fast = best_split(&ds, &rows, &[3, 1]).map(|s| (s.feature, s.threshold));
        let slow = brute_best_split(&ds, &rows, &[1, 3]).map(|(f, t, _)| (f, t));
        assert_eq!(fast, slow, "seed {seed}");
    }
}

#[test]
fn knn_matches_exhaustive_sort() {
    for seed in 0..100 {
        let mut rng = rng::stream(seed, 1);
        let pts: Vec<f64> = (0..50 * 5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let q = rng.random_range(0..50);
        assert_eq!(knn_minority(&pts, 5, q, 5), brute_knn(&pts, 5, q, 5), "seed {seed}");
    }
}

#[test]
fn knn_ties_on_a_grid() {
    let pts: Vec<f64> = (0..30).flat_map(|i| [(i % 5) as f64, (i / 5) as f64]).collect();
    for q in 0..30 {
        assert_eq!(knn_minority(&pts, 2, q, 6), brute_knn(&pts, 2, q, 6));
    }
}

fn imbalanced(seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, 2);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..1000 {
        let class = usize::from(i >= 900);
        for _ in 0..4 {
            x.push(class as f64 * 2.0 + rng.random_range(-1.0..1.0));
        }
        y.push(class);
    }
    Dataset::from_matrix(4, x, y, 2).unwrap()
}

#[test]
fn every_synthetic_row_lies_on_a_neighbor_segment() {
    let ds = imbalanced(7);
    let (out, report) = smote_resample(&ds, &SmoteConfig::default()).unwrap();
    assert_eq!(out.class_counts(), vec![900, 900]);
    assert_eq!(report.total_synthetic(), 800);
    let minority: Vec<f64> = ds.rows().zip(ds.y()).filter(|(_, &c)| c == 1).flat_map(|(r, _)| r.to_vec()).collect();
    let synthetic: Vec<&[f64]> = out
        .rows()
        .zip(out.origins())
        .filter(|(_, o)| **o == RowOrigin::Synthetic)
        .map(|(r, _)| r)
        .collect();
    assert_eq!(synthetic.len(), 800);
    for s in synthetic {
        assert!(on_some_segment(s, &minority, 4, 5), "{s:?}");
    }
}

#[test]
fn depth_two_tree_matches_reference() {
    for seed in 0..10 {
        let ds = blobs(100, 2, 2, 1.5, seed);
        let rows: Vec<usize> = (0..100).collect();
        let reference = RefTree::fit(&ds, &rows, 2);
        let params = TreeParams { max_depth: Some(2), ..TreeParams::default() };
        let tree = fit_tree(&ds, &params).unwrap();
        for r in ds.rows() {
            assert_eq!(tree.predict_row(r), reference.predict(r), "seed {seed}");
        }
        for i in 0..50 {
            for j in 0..50 {
                let p = [-2.0 + i as f64 * 0.11, -2.0 + j as f64 * 0.11];
                assert_eq!(tree.predict_row(&p), reference.predict(&p), "seed {seed} at {p:?}");
            }
        }
    }
}

#[test]
fn unlimited_tree_fits_consistent_data() {
    let ds = blobs(300, 3, 4, 0.7, 11);
    let tree = fit_tree(&ds, &TreeParams::default()).unwrap();
    let pred = tree.predict(ds.x(), ds.n_cols()).unwrap();
    assert_eq!(pred, ds.y());
}

#[test]
fn depth_zero_is_the_majority_leaf() {
    let ds = Dataset::from_matrix(1, vec![0.0, 1.0, 2.0, 3.0], vec![1, 0, 1, 2], 3).unwrap();
    let tree = fit_tree(&ds, &TreeParams { max_depth: Some(0), ..TreeParams::default() }).unwrap();
    assert_eq!(tree.n_leaves(), 1);
    assert_eq!(tree.predict(&[9.0, -9.0], 1).unwrap(), vec![1, 1]);
}

#[test]
fn degenerate_forest_is_a_tree() {
    let ds = blobs(200, 3, 3, 1.0, 4);
    let params = ForestParams {
        n_trees: 1,
        bootstrap: false,
        features_per_split: Some(3),
        ..ForestParams::default()
    };
    let forest = fit_forest(&ds, &params).unwrap();
    let tree = fit_tree(&ds, &TreeParams::default()).unwrap();
    assert_eq!(forest.trees[0], tree);
    let probe = blobs(200, 3, 3, 1.0, 5);
    assert_eq!(forest.predict(probe.x(), 3).unwrap(), tree.predict(probe.x(), 3).unwrap());
}

#[test]
fn forest_beats_tree_under_label_noise() {
    let train = with_label_noise(&blobs(500, 2, 4, 1.2, 21), 0.2, 1);
    let test = blobs(500, 2, 4, 1.2, 22);
    let tree = fit_tree(&train, &TreeParams::default()).unwrap();
    let forest = fit_forest(&train, &ForestParams { n_trees: 25, ..ForestParams::default() }).unwrap();
    let acc = |pred: Vec<usize>| ztids::metrics::accuracy(test.y(), &pred);
    let tree_acc = acc(tree.predict(test.x(), 4).unwrap());
    let forest_acc = acc(forest.predict(test.x(), 4).unwrap());
    assert!(forest_acc >= tree_acc, "forest {forest_acc} tree {tree_acc}");
}

#[test]
fn importances_find_the_informative_feature() {
    let mut rng = rng::stream(3, 3);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..400 {
        let signal: f64 = rng.random_range(0.0..1.0);
        x.push(signal);
        for _ in 0..4 {
            x.push(rng.random_range(0.0..1.0));
        }
        y.push(usize::from(signal > 0.5));
    }
    let ds = Dataset::from_matrix(5, x, y, 2).unwrap();
    let forest = fit_forest(&ds, &ForestParams { n_trees: 50, ..ForestParams::default() }).unwrap();
    let imp = forest.feature_importances();
    assert_abs_diff_eq!(imp.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    assert!(imp[0] > 0.9, "{imp:?}");
    let noise = &imp[1..];
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    assert!(noise.iter().all(|&v| v < 3.0 * mean + 1e-12), "{imp:?}");
}

#[test]
fn hand_computed_metrics() {
    let names: Vec<String> = ["A", "B", "C"].map(String::from).to_vec();
    let cm = confusion(&[0, 0, 1, 1, 2], &[0, 1, 1, 1, 2], &names).unwrap();
    assert_eq!(cm.counts, vec![vec![1, 1, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    let m = compute_metrics(&cm).unwrap();
    assert_abs_diff_eq!(m.accuracy, 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(m.per_class[0].f1, 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.per_class[1].f1, 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(m.per_class[2].f1, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.weighted_f1, 59.0 / 75.0, epsilon = 1e-9);
    assert_eq!(format!("{:.6}", m.weighted_f1), "0.786667");
}
