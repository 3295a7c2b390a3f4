//! Metric and benchmark-grid checks.

mod common;

use common::{macro_pairwise_auc, pairwise_auc};
use liit_core::{
    auc, make_blobs, run_benchmark, BenchConfig, LiitConfig, Matrix, PerturbSpec, Regime,
    Strategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rank_auc_equals_exhaustive_pair_counting_exactly() {
    // Random low-m instances with deliberate ties; equality must be exact,
    // tie halves included.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..300 {
        let m = rng.random_range(2..=50usize);
        let k = if case % 3 == 0 {
            rng.random_range(3..=5usize)
        } else {
            2
        };
        let y: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
        let quantized = rng.random_bool(0.5);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let mut row: Vec<f64> = (0..k)
                    .map(|_| {
                        let v: f64 = rng.random_range(0.0..1.0);
                        if quantized {
                            (v * 5.0).round() / 5.0
                        } else {
                            v
                        }
                    })
                    .collect();
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    row.iter_mut().for_each(|v| *v /= total);
                }
                row
            })
            .collect();
        let proba = Matrix::from_rows(&rows);
        let ours = auc(&y, &proba);
        let reference = macro_pairwise_auc(&y, &proba);
        assert_eq!(ours, reference, "case {case} (m={m}, k={k})");
    }
}

#[test]
fn binary_rank_auc_spot_values() {
    let scores = [0.1, 0.4, 0.35, 0.8];
    let positives = [false, false, true, true];
    assert_eq!(pairwise_auc(&scores, &positives), Some(0.75));
}

#[test]
fn benchmark_grid_shape_and_aggregation() {
    let datasets = vec![
        make_blobs::<f64>(140, 3, 2, 0.6, 5),
        make_blobs::<f64>(150, 4, 3, 0.6, 6),
    ];
    let strategies = [Strategy::Random, Strategy::QuantileRepeated];
    let cfg = BenchConfig::<f64> {
        reruns: 2,
        master_seed: 11,
        perturb: PerturbSpec {
            levels: vec![0.0, 0.04, 0.08],
            seed: 1,
            mode: Default::default(),
        },
        liit: LiitConfig {
            iterations: 2,
            epochs_per_iteration: 4,
            full_model_max_epochs: 8,
            ..Default::default()
        },
        ..Default::default()
    };
    let reports = run_benchmark(&datasets, &strategies, &cfg);

    // 2 datasets × (1 full + 2 strategies) = 6 report rows.
    assert_eq!(reports.len(), 6);
    for report in &reports {
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert_eq!(report.clean_aucs.len(), 2);
        assert_eq!(report.rerun_seeds.len(), 2);
        assert_eq!(report.curve.len(), 3);

        // Aggregates recompute from the stored per-rerun values.
        let values: Vec<f64> = report.clean_aucs.iter().filter_map(|v| *v).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        assert!((report.mean_auc.unwrap() - mean).abs() < 1e-12);
        assert!((report.std_auc.unwrap() - var.sqrt()).abs() < 1e-12);

        // The zero-perturbation point is the clean AUC, bit for bit.
        assert_eq!(report.curve[0].level, 0.0);
        assert_eq!(report.curve[0].aucs, report.clean_aucs);

        // AUC values stay inside [0, 1].
        for point in &report.curve {
            for value in point.aucs.iter().flatten() {
                assert!((0.0..=1.0).contains(value));
            }
        }
    }
}

#[test]
fn benchmark_is_deterministic_up_to_timing() {
    let datasets = vec![make_blobs::<f64>(120, 3, 2, 0.6, 9)];
    let strategies = [Strategy::AnomalyUnique];
    let cfg = BenchConfig::<f64> {
        reruns: 2,
        master_seed: 4,
        liit: LiitConfig {
            iterations: 2,
            epochs_per_iteration: 3,
            full_model_max_epochs: 6,
            ..Default::default()
        },
        ..Default::default()
    };
    let a = run_benchmark(&datasets, &strategies, &cfg);
    let b = run_benchmark(&datasets, &strategies, &cfg);
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.clean_aucs, rb.clean_aucs);
        assert_eq!(ra.rerun_seeds, rb.rerun_seeds);
        assert_eq!(ra.mts_draws, rb.mts_draws);
        let curve_a: Vec<_> = ra.curve.iter().map(|p| p.aucs.clone()).collect();
        let curve_b: Vec<_> = rb.curve.iter().map(|p| p.aucs.clone()).collect();
        assert_eq!(curve_a, curve_b);
    }
}

#[test]
fn parallel_grid_matches_sequential() {
    let datasets = vec![
        make_blobs::<f64>(110, 2, 2, 0.5, 2),
        make_blobs::<f64>(130, 3, 2, 0.5, 3),
    ];
    let strategies = [Strategy::Random];
    let mut cfg = BenchConfig::<f64> {
        reruns: 2,
        master_seed: 8,
        liit: LiitConfig {
            iterations: 2,
            epochs_per_iteration: 3,
            full_model_max_epochs: 5,
            ..Default::default()
        },
        ..Default::default()
    };
    let sequential = run_benchmark(&datasets, &strategies, &cfg);
    cfg.parallelism = 4;
    let parallel = run_benchmark(&datasets, &strategies, &cfg);
    assert_eq!(sequential.len(), parallel.len());
    for (a, b) in sequential.iter().zip(&parallel) {
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.regime, b.regime);
        assert_eq!(a.clean_aucs, b.clean_aucs);
    }
}

#[test]
fn full_model_regime_reports_no_sampling_cost() {
    let datasets = vec![make_blobs::<f64>(100, 2, 2, 0.5, 12)];
    let cfg = BenchConfig::<f64> {
        reruns: 1,
        liit: LiitConfig {
            full_model_max_epochs: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    let reports = run_benchmark(&datasets, &[], &cfg);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].regime, Regime::FullModel);
    assert_eq!(reports[0].scoring_secs, vec![0.0]);
    assert_eq!(reports[0].mts_draws, vec![0]);
}
