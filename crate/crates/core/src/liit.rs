//! Training orchestration: the full-data baseline and the LIIT loop.
//!
//! LIIT scores the training partition once, seeds a Modified Training Sample
//! per class, then repeatedly (train on the sample → predict on the full
//! training partition → feed the misclassified rows back into the sample).
//! The same network persists across iterations; it is retrained, never
//! re-initialized.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::SplitDataset;
use crate::error::{Error, Result};
use crate::lad::{score_dataset, LadConfig};
use crate::net::{DenseNet, NetConfig, TrainOutcome};
use crate::sampler::{derive_c_size, MtsSample, SamplerConfig, Strategy, DEFAULT_MTS_FRACTION};
use crate::scalar::Scalar;

/// Configuration for both training regimes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct LiitConfig<F> {
    /// LIIT rounds: one initial sample plus `iterations − 1` updates.
    pub iterations: usize,
    /// Epoch budget per LIIT round. With the defaults,
    /// `iterations · epochs_per_iteration == full_model_max_epochs`, so both
    /// regimes see the same total budget.
    pub epochs_per_iteration: usize,
    /// Epoch budget for the full-data baseline.
    pub full_model_max_epochs: usize,
    pub strategy: Strategy,
    /// Per-class draw count; `None` derives it from `mts_fraction`.
    pub c_size: Option<usize>,
    /// Fraction of the training data one sampling step should draw.
    pub mts_fraction: f64,
    pub sampler_seed: u64,
    pub lad: LadConfig<F>,
    pub net: NetConfig<F>,
}

impl<F: Scalar> Default for LiitConfig<F> {
    fn default() -> Self {
        Self {
            iterations: 6,
            epochs_per_iteration: 30,
            full_model_max_epochs: 180,
            strategy: Strategy::default(),
            c_size: None,
            mts_fraction: DEFAULT_MTS_FRACTION,
            sampler_seed: 0,
            lad: LadConfig::default(),
            net: NetConfig::default(),
        }
    }
}

impl<F: Scalar> LiitConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::Config("liit.iterations must be >= 1".into()));
        }
        if self.epochs_per_iteration < 1 {
            return Err(Error::Config("liit.epochs_per_iteration must be >= 1".into()));
        }
        if self.full_model_max_epochs < 1 {
            return Err(Error::Config("liit.full_model_max_epochs must be >= 1".into()));
        }
        if let Some(c) = self.c_size {
            if c < 1 {
                return Err(Error::Config("liit.c_size must be >= 1".into()));
            }
        }
        if !(self.mts_fraction > 0.0 && self.mts_fraction <= 1.0) {
            return Err(Error::Config("liit.mts_fraction must lie in (0, 1]".into()));
        }
        self.lad.validate()
    }

    /// The per-class draw count used for a training partition of `n_train`
    /// rows and `k` classes.
    pub fn resolved_c_size(&self, n_train: usize, k: usize) -> usize {
        self.c_size
            .unwrap_or_else(|| derive_c_size(n_train, k, self.mts_fraction))
    }
}

/// One LIIT round as observed on the full training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<F> {
    pub iteration: usize,
    /// Sample size the round trained on (duplicates included).
    pub mts_size: usize,
    pub distinct_mts_rows: usize,
    pub misclassified_per_class: Vec<usize>,
    pub epochs_run: usize,
    pub train_loss: F,
    pub val_loss: Option<F>,
    pub wall_secs: f64,
}

/// Full record of a LIIT run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiitTrace<F> {
    pub records: Vec<IterationRecord<F>>,
    pub c_size: usize,
    /// Wall time of the one-off LAD scoring pass.
    pub scoring_secs: f64,
    /// Scoring plus the whole train/evaluate/update loop.
    pub total_secs: f64,
    /// Final sample with provenance.
    pub mts: MtsSample,
}

/// Planned total draw count: `iterations · k · c_size` (the initial draw
/// plus every update, before deduplication).
pub fn mts_budget<F: Scalar>(cfg: &LiitConfig<F>, n_train: usize, k: usize) -> usize {
    cfg.iterations * k * cfg.resolved_c_size(n_train, k)
}

fn validation_views<F: Scalar>(
    split: &SplitDataset<F>,
) -> Option<(&crate::matrix::Matrix<F>, &[usize])> {
    if split.validation.n() > 0 {
        Some((split.validation.features(), split.validation.labels()))
    } else {
        None
    }
}

/// Baseline: batch-train one network on the entire training partition.
pub fn train_full<F: Scalar>(
    split: &SplitDataset<F>,
    cfg: &LiitConfig<F>,
) -> Result<(DenseNet<F>, TrainOutcome<F>)> {
    cfg.validate()?;
    let train = &split.train;
    let mut net_cfg = cfg
        .net
        .clone()
        .with_dims(train.dim(), train.n_classes());
    net_cfg.max_epochs = cfg.full_model_max_epochs;
    let mut net = DenseNet::new(net_cfg)?;
    let outcome = net.train_batches(train.features(), train.labels(), validation_views(split))?;
    Ok((net, outcome))
}

/// The LIIT loop.
///
/// LAD scores are computed once, before the first round, and reused by every
/// update. Each round trains the same network on the current sample for at
/// most `epochs_per_iteration` epochs, evaluates it on the full training
/// partition, and grows the sample from the misclassified rows. The loop
/// exits early when nothing is misclassified; the sample is not updated
/// after the final round (it would never be trained on).
pub fn train_liit<F: Scalar>(
    split: &SplitDataset<F>,
    cfg: &LiitConfig<F>,
) -> Result<(DenseNet<F>, LiitTrace<F>)> {
    cfg.validate()?;
    let train = &split.train;
    let k = train.n_classes();
    let counts = train.class_counts();
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class });
    }

    let started = Instant::now();
    let scores = score_dataset(train, &cfg.lad)?;
    let scoring_secs = started.elapsed().as_secs_f64();

    let sampler_cfg = SamplerConfig {
        c_size: cfg.resolved_c_size(train.n(), k),
        seed: cfg.sampler_seed,
    };
    let mut mts = MtsSample::init(&scores, train.labels(), cfg.strategy, &sampler_cfg)?;

    let mut net_cfg = cfg
        .net
        .clone()
        .with_dims(train.dim(), k);
    net_cfg.max_epochs = cfg.epochs_per_iteration;
    let mut net = DenseNet::new(net_cfg)?;
    let val = validation_views(split);

    let mut records = Vec::with_capacity(cfg.iterations);
    for iteration in 1..=cfg.iterations {
        let round_start = Instant::now();
        let mts_x = train.features().gather_rows(mts.indices());
        let mts_y: Vec<usize> = mts.indices().iter().map(|&i| train.labels()[i]).collect();
        let outcome = net.train_batches(&mts_x, &mts_y, val)?;

        let predictions = net.predict(train.features())?;
        let mut misclassified: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, (&predicted, &actual)) in predictions.iter().zip(train.labels()).enumerate() {
            if predicted != actual {
                misclassified[actual].push(i);
            }
        }
        let total_misclassified: usize = misclassified.iter().map(Vec::len).sum();

        records.push(IterationRecord {
            iteration,
            mts_size: mts.len(),
            distinct_mts_rows: mts.distinct_len(),
            misclassified_per_class: misclassified.iter().map(Vec::len).collect(),
            epochs_run: outcome.epochs_run,
            train_loss: outcome.train_loss,
            val_loss: outcome.val_loss,
            wall_secs: round_start.elapsed().as_secs_f64(),
        });

        if total_misclassified == 0 {
            break;
        }
        if iteration < cfg.iterations {
            mts.update(&misclassified, &scores, cfg.strategy, &sampler_cfg);
        }
    }

    let trace = LiitTrace {
        records,
        c_size: sampler_cfg.c_size,
        scoring_secs,
        total_secs: started.elapsed().as_secs_f64(),
        mts,
    };
    Ok((net, trace))
}
