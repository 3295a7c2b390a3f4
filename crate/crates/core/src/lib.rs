//! LAD anomaly scoring and LAD Improved Iterative Training (LIIT).
//!
//! The crate scores tabular training data with a large-deviations rate
//! function, grows Modified Training Samples under five sampling strategies,
//! trains a small dense classifier iteratively on them, and benchmarks the
//! result (AUC, wall time, perturbation stability) against batch training on
//! the full data.
//!
//! All numeric code is generic over the scalar type via [`Scalar`]
//! (`f32` or `f64`); concrete aliases live at the crate root.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod lad;
pub mod liit;
pub mod matrix;
pub mod net;
pub mod sampler;
pub mod scalar;
pub mod seed;
pub mod stats;

pub use dataset::{
    load_csv, make_blobs, split, train_stats, write_csv, LabelColumn, SplitDataset,
    TabularDataset, TrainStats,
};
pub use error::{Error, Result};
pub use eval::{
    auc, perturb, rerun_seed, run_benchmark, split_seed, write_auc_table, BenchConfig, EvalReport,
    PerturbMode, PerturbPoint, PerturbSpec, Regime,
};
pub use lad::{
    lad_scores, lad_scores_by_class, score_dataset, Divisor, LadConfig, ScoreVector, ScoringScope,
};
pub use liit::{mts_budget, train_full, train_liit, IterationRecord, LiitConfig, LiitTrace};
pub use matrix::Matrix;
pub use net::{DenseNet, Gradients, NetConfig, TrainOutcome};
pub use sampler::{
    derive_c_size, MtsSample, ProvenanceRecord, SamplerConfig, Strategy, DEFAULT_MTS_FRACTION,
};
pub use scalar::Scalar;
pub use seed::derive_seed;

/// `f64` aliases: the precision used by the CLI and the acceptance suite.
pub type Dataset64 = TabularDataset<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Net64 = DenseNet<f64>;
pub type Scores64 = lad::ScoreVector<f64>;

/// `f32` aliases for memory-constrained runs.
pub type Dataset32 = TabularDataset<f32>;
pub type Matrix32 = Matrix<f32>;
pub type Net32 = DenseNet<f32>;
pub type Scores32 = lad::ScoreVector<f32>;
