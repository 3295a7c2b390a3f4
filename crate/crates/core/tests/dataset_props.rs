//! Split, statistics and CSV properties.

mod common;

use common::nearest_centroid;
use liit_core::{load_csv, make_blobs, split, train_stats, write_csv, LabelColumn, Matrix, TabularDataset};
use proptest::prelude::*;

#[test]
fn seed_sweep_keeps_train_fraction_near_eighty_percent() {
    let ds = make_blobs::<f64>(1000, 3, 4, 1.0, 2);
    for seed in 0..5u64 {
        let sp = split(&ds, seed).unwrap();
        let fraction = sp.train.n() as f64 / 1000.0;
        assert!(
            (0.79..=0.81).contains(&fraction),
            "seed {seed}: fraction {fraction}"
        );
    }
}

#[test]
fn nearest_centroid_separates_spread_point_one_blobs() {
    let ds = make_blobs::<f64>(400, 5, 3, 0.1, 13);
    let predictions = nearest_centroid(ds.features(), ds.labels(), 3, ds.features());
    let accuracy = predictions
        .iter()
        .zip(ds.labels())
        .filter(|(a, b)| a == b)
        .count() as f64
        / ds.n() as f64;
    assert!(accuracy >= 0.99, "accuracy {accuracy}");
}

#[test]
fn train_stats_matches_one_pass_reference() {
    // Library statistics are two-pass; the reference is the one-pass
    // E[x²] − μ² form.
    let ds = make_blobs::<f64>(50, 3, 2, 2.0, 31);
    let stats = train_stats(&ds);
    for j in 0..3 {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..ds.n() {
            let v = ds.features().get(i, j);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / ds.n() as f64;
        let var = sum_sq / ds.n() as f64 - mean * mean;
        assert!((stats.mean[j] - mean).abs() < 1e-12);
        assert!((stats.variance[j] - var).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_partitions_every_row_exactly_once(
        n in 10usize..400,
        k in 2usize..6,
        seed in 0u64..1000,
    ) {
        prop_assume!(n >= 2 * k);
        let ds = make_blobs::<f64>(n, 2, k, 1.0, seed);
        let sp = split(&ds, seed).unwrap();
        let mut all: Vec<usize> = sp
            .train_rows
            .iter()
            .chain(&sp.val_rows)
            .chain(&sp.test_rows)
            .copied()
            .collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..n).collect();
        prop_assert_eq!(all, expected);
        prop_assert_eq!(sp.train.n(), (0.8 * n as f64).floor() as usize);
        prop_assert_eq!(sp.validation.n(), (0.1 * n as f64).floor() as usize);
    }

    #[test]
    fn stratification_is_within_one_row_of_eighty_percent(
        n in 60usize..500,
        k in 2usize..5,
        seed in 0u64..1000,
    ) {
        let ds = make_blobs::<f64>(n, 2, k, 1.0, seed);
        let sp = split(&ds, seed).unwrap();
        let class_sizes = ds.class_counts();
        let train_sizes = sp.train.class_counts();
        for class in 0..k {
            if class_sizes[class] >= 10 {
                let target = 0.8 * class_sizes[class] as f64;
                let got = train_sizes[class] as f64;
                prop_assert!(
                    (got - target).abs() <= 1.0,
                    "class {} of size {}: train {} vs target {}",
                    class, class_sizes[class], got, target
                );
            }
        }
    }

    #[test]
    fn csv_round_trip_is_identity(
        n in 4usize..40,
        d in 1usize..6,
        seed in 0u64..500,
    ) {
        prop_assume!(n >= 4);
        let ds = make_blobs::<f64>(n, d, 2, 1.7, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("round.csv");
        write_csv(&ds, &path).unwrap();
        let back: TabularDataset<f64> = load_csv(&path, &LabelColumn::Name("label".into()), true).unwrap();
        prop_assert_eq!(back.labels(), ds.labels());
        for i in 0..ds.n() {
            for j in 0..d {
                prop_assert!((back.features().get(i, j) - ds.features().get(i, j)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn ecoli_scale_file_loads_with_expected_shape() {
    // A 336×7, 8-class file exercises the dimensions of the smallest
    // bundled benchmark dataset.
    let counts = [143usize, 77, 52, 35, 20, 5, 2, 2];
    let names = ["cp", "im", "pp", "imU", "om", "omL", "imS", "imL"];
    let mut rows = Vec::new();
    for (class, (&count, name)) in counts.iter().zip(&names).enumerate() {
        for r in 0..count {
            let features: Vec<String> = (0..7)
                .map(|j| format!("{:.2}", 0.1 * class as f64 + 0.01 * ((r + j) % 9) as f64))
                .collect();
            rows.push(format!("{},{}", features.join(","), name));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ecoli_like.csv");
    std::fs::write(&path, rows.join("\n")).unwrap();
    let ds: TabularDataset<f64> = load_csv(&path, &LabelColumn::Index(7), false).unwrap();
    assert_eq!(ds.n(), 336);
    assert_eq!(ds.dim(), 7);
    assert_eq!(ds.n_classes(), 8);
    assert_eq!(ds.class_counts(), counts.to_vec());
}

#[test]
fn f32_loading_and_stats_work() {
    let ds = make_blobs::<f32>(30, 2, 2, 0.5, 7);
    let stats = train_stats(&ds);
    assert_eq!(stats.mean.len(), 2);
    assert!(stats.variance.iter().all(|v| *v >= 0.0));
    let _ = Matrix::<f32>::zeros(2, 2);
}
