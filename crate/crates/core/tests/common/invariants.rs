//! Invariant checks shared by the property suite and the acceptance runner.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use ztids::classifiers::svm::argmax_scores;
use ztids::metrics::{compute_metrics, confusion};
use ztids::preprocess::{fit_scaler, split_indices, CategoryEncoder, ScalerScope, SplitSpec};
use ztids::smote::{smote_resample, SmoteConfig};
use ztids::Dataset;

type Check = Result<(), TestCaseError>;

pub fn dataset(max_classes: usize, max_per_class: usize, n_cols: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec(2usize..=max_per_class, 2..=max_classes).prop_flat_map(move |sizes| {
        let n: usize = sizes.iter().sum();
        prop::collection::vec(-50i32..50, n * n_cols).prop_map(move |vals| {
            let y: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect();
            let x = vals.iter().map(|&v| f64::from(v) / 4.0).collect();
            Dataset::from_matrix(n_cols, x, y, sizes.len()).unwrap()
        })
    })
}

pub fn labels_pair(max_classes: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (1..=max_classes, 1..=max_len).prop_flat_map(|(c, n)| {
        (Just(c), prop::collection::vec(0..c, n), prop::collection::vec(0..c, n))
    })
}

pub fn class_names(c: usize) -> Vec<String> {
    (0..c).map(|i| format!("c{i}")).collect()
}

pub fn split_input() -> impl Strategy<Value = (Vec<usize>, f64, u64)> {
    (prop::collection::vec(1usize..200, 1..5), 0.05f64..0.6, any::<u64>())
}

/// Equal seeds give equal partitions, and every class's test share is
/// within `1 / class_size` of the requested fraction.
pub fn stratification((sizes, fraction, seed): (Vec<usize>, f64, u64)) -> Check {
    let y: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect();
    let spec = SplitSpec { test_fraction: fraction, seed, stratified: true };
    let (train, test) = split_indices(&y, sizes.len(), &spec).unwrap();
    prop_assert_eq!(split_indices(&y, sizes.len(), &spec).unwrap(), (train.clone(), test.clone()));
    let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
    all.sort_unstable();
    prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
    for (c, &n) in sizes.iter().enumerate() {
        let share = test.iter().filter(|&&i| y[i] == c).count() as f64 / n as f64;
        prop_assert!((share - fraction).abs() <= 1.0 / n as f64 + 1e-12, "class {} size {} share {}", c, n, share);
    }
    Ok(())
}

pub fn scaler_input() -> impl Strategy<Value = (Dataset, Vec<f64>)> {
    (dataset(3, 30, 3), prop::collection::vec(-1e6f64..1e6, 300))
}

/// Overwriting every test row leaves the fitted scaler untouched.
pub fn scaler_train_only((ds, noise): (Dataset, Vec<f64>)) -> Check {
    let spec = SplitSpec::default();
    let (train, test) = split_indices(ds.y(), ds.n_classes(), &spec).unwrap();
    let fitted = fit_scaler(&ds.subset(&train), ScalerScope::AllColumns).unwrap();
    let mut x = ds.x().to_vec();
    for (k, &row) in test.iter().enumerate() {
        for col in 0..3 {
            x[row * 3 + col] = noise[(k * 3 + col) % noise.len()];
        }
    }
    let mutated = Dataset::from_matrix(3, x, ds.y().to_vec(), ds.n_classes()).unwrap();
    let (train2, _) = split_indices(mutated.y(), mutated.n_classes(), &spec).unwrap();
    prop_assert_eq!(&train2, &train);
    let refit = fit_scaler(&mutated.subset(&train2), ScalerScope::AllColumns).unwrap();
    prop_assert_eq!(refit, fitted);
    Ok(())
}

pub fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z_0-9]{1,8}", 1..40)
}

pub fn encoder_round_trip(tokens: Vec<String>) -> Check {
    let enc = CategoryEncoder::fit(2, tokens.iter().map(String::as_str));
    for t in &tokens {
        let code = enc.encode(t).unwrap();
        prop_assert_eq!(enc.decode(code), Some(t.as_str()));
    }
    prop_assert!(enc.vocabulary.windows(2).all(|w| w[0] < w[1]));
    Ok(())
}

pub fn smote_input() -> impl Strategy<Value = (Dataset, u64)> {
    (dataset(4, 40, 3), any::<u64>())
}

/// After balancing, every class has the majority's count and each class
/// report adds up.
pub fn smote_class_counts((ds, seed): (Dataset, u64)) -> Check {
    let (out, report) = smote_resample(&ds, &SmoteConfig { seed, ..SmoteConfig::default() }).unwrap();
    let max = ds.class_counts().into_iter().max().unwrap();
    prop_assert!(out.class_counts().iter().all(|&c| c == max));
    for r in &report.classes {
        prop_assert_eq!(r.after, r.before + r.synthetic);
        prop_assert_eq!(r.after, max);
    }
    Ok(())
}

pub fn permutation_input() -> impl Strategy<Value = ((usize, Vec<usize>, Vec<usize>), u64)> {
    (labels_pair(6, 80), any::<u64>())
}

pub fn metric_permutation(((c, t, p), perm_seed): ((usize, Vec<usize>, Vec<usize>), u64)) -> Check {
    let mut perm: Vec<usize> = (0..c).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ztids::rng::stream(perm_seed, 0));
    let m = compute_metrics(&confusion(&t, &p, &class_names(c)).unwrap()).unwrap();
    let tp: Vec<usize> = t.iter().map(|&v| perm[v]).collect();
    let pp: Vec<usize> = p.iter().map(|&v| perm[v]).collect();
    let mp = compute_metrics(&confusion(&tp, &pp, &class_names(c)).unwrap()).unwrap();
    prop_assert_eq!(m.accuracy, mp.accuracy);
    prop_assert!((m.weighted_f1 - mp.weighted_f1).abs() < 1e-12);
    prop_assert!((m.macro_f1 - mp.macro_f1).abs() < 1e-12);
    for (old, &new) in perm.iter().enumerate() {
        prop_assert_eq!(m.per_class[old].f1, mp.per_class[new].f1);
        prop_assert_eq!(m.per_class[old].support, mp.per_class[new].support);
    }
    Ok(())
}

pub fn scores_input() -> impl Strategy<Value = (Vec<i32>, f64)> {
    (prop::collection::vec(-100i32..100, 1..8), 1e-3f64..1e3)
}

pub fn argmax_scale((scores, scale): (Vec<i32>, f64)) -> Check {
    let s: Vec<f64> = scores.iter().map(|&v| f64::from(v) / 8.0).collect();
    let scaled: Vec<f64> = s.iter().map(|v| v * scale).collect();
    prop_assert_eq!(argmax_scores(&s), argmax_scores(&scaled));
    Ok(())
}
