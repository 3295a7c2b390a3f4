//! Modified Training Sample construction.
//!
//! The sample is an ordered multiset of training-row indices. It is seeded
//! once per class with the most normal rows (lowest anomaly score) — or
//! uniformly for the random baseline — and then grown from the misclassified
//! rows after each training round, under one of five strategies.
//!
//! Selection ties always break toward the lower row index, so every draw is
//! exactly reproducible.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lad::ScoreVector;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::stats::quantile;

/// The five sampling strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Highest-score rows; repeat entries are kept.
    AnomalyRepeated,
    /// Half lowest- and half highest-score rows; sample kept duplicate-free.
    AnomalyNormalUnique,
    /// Highest-score rows; sample kept duplicate-free.
    AnomalyUnique,
    /// Rows nearest evenly spaced score quantiles; repeats kept.
    QuantileRepeated,
    /// Uniform draws; the non-LAD baseline.
    #[default]
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::AnomalyRepeated,
        Strategy::AnomalyNormalUnique,
        Strategy::AnomalyUnique,
        Strategy::QuantileRepeated,
        Strategy::Random,
    ];

    /// Whether the sample is deduplicated after every update.
    pub fn dedups(self) -> bool {
        matches!(self, Strategy::AnomalyNormalUnique | Strategy::AnomalyUnique)
    }

    /// Stable machine-readable tag (used for seed derivation and file names).
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::AnomalyRepeated => "anomaly_repeated",
            Strategy::AnomalyNormalUnique => "anomaly_normal_unique",
            Strategy::AnomalyUnique => "anomaly_unique",
            Strategy::QuantileRepeated => "quantile_repeated",
            Strategy::Random => "random",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Strategy::AnomalyRepeated => "Anomaly (Repeated)",
            Strategy::AnomalyNormalUnique => "Anomaly + Normal (Unique)",
            Strategy::AnomalyUnique => "Anomaly (Unique)",
            Strategy::QuantileRepeated => "Quantile Samples (Repeated)",
            Strategy::Random => "Random",
        };
        f.write_str(name)
    }
}

/// Sampler parameters: rows drawn per class per step, and the seed feeding
/// the random baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub c_size: usize,
    pub seed: u64,
}

/// Per-class draw count sized so one step pulls roughly `fraction` of the
/// training data split evenly over classes (never less than one row).
pub fn derive_c_size(n_train: usize, n_classes: usize, fraction: f64) -> usize {
    assert!(n_classes >= 1 && n_train >= n_classes);
    let raw = (fraction * n_train as f64 / n_classes as f64).round() as usize;
    raw.max(1)
}

/// Default per-step sampling fraction (one step ≈ 5.5% of training data).
pub const DEFAULT_MTS_FRACTION: f64 = 0.055;

/// One append event: which rows iteration `iteration` added for `class`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub iteration: usize,
    pub class: usize,
    pub indices: Vec<usize>,
}

/// Ordered multiset of training-row indices plus full append provenance.
/// Concatenating the provenance records always reproduces `indices` exactly,
/// including after deduplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MtsSample {
    indices: Vec<usize>,
    provenance: Vec<ProvenanceRecord>,
    next_iteration: usize,
    appended_total: usize,
}

impl MtsSample {
    /// Initial sample. Strategies other than `Random` seed each class with
    /// its `c_size` lowest-score rows; `Random` draws uniformly without
    /// replacement. Classes smaller than `c_size` contribute all members.
    pub fn init<F: Scalar>(
        scores: &ScoreVector<F>,
        labels: &[usize],
        strategy: Strategy,
        cfg: &SamplerConfig,
    ) -> Result<Self> {
        assert_eq!(scores.len(), labels.len(), "scores must align with labels");
        assert!(cfg.c_size >= 1, "c_size must be at least 1");
        if labels.is_empty() {
            return Err(Error::EmptyClass { class: 0 });
        }
        let n_classes = labels.iter().copied().max().unwrap() + 1;
        let mut sample = Self {
            indices: Vec::new(),
            provenance: Vec::new(),
            next_iteration: 1,
            appended_total: 0,
        };
        for class in 0..n_classes {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            if members.is_empty() {
                return Err(Error::EmptyClass { class });
            }
            let picks = match strategy {
                Strategy::Random => {
                    let mut rng = class_rng(cfg.seed, 0, class);
                    draw_without_replacement(&members, cfg.c_size, &mut rng)
                }
                _ => lowest_by_score(&members, &scores.scores, cfg.c_size),
            };
            sample.append(0, class, picks);
        }
        if strategy.dedups() {
            sample.dedup_preserving_first();
        }
        Ok(sample)
    }

    /// Grow the sample from the per-class misclassified row lists.
    ///
    /// A class with no misclassified rows contributes nothing; classes with
    /// fewer rows than requested contribute everything they have.
    pub fn update<F: Scalar>(
        &mut self,
        misclassified: &[Vec<usize>],
        scores: &ScoreVector<F>,
        strategy: Strategy,
        cfg: &SamplerConfig,
    ) {
        let iteration = self.next_iteration;
        self.next_iteration += 1;
        for (class, rows) in misclassified.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let picks = match strategy {
                Strategy::AnomalyRepeated | Strategy::AnomalyUnique => {
                    highest_by_score(rows, &scores.scores, cfg.c_size)
                }
                Strategy::AnomalyNormalUnique => {
                    let n_low = cfg.c_size / 2;
                    let n_high = cfg.c_size - n_low;
                    let mut picks = lowest_by_score(rows, &scores.scores, n_low);
                    picks.extend(highest_by_score(rows, &scores.scores, n_high));
                    picks
                }
                Strategy::QuantileRepeated => quantile_picks(rows, &scores.scores, cfg.c_size),
                Strategy::Random => {
                    let mut rng = class_rng(cfg.seed, iteration, class);
                    draw_without_replacement(rows, cfg.c_size, &mut rng)
                }
            };
            self.append(iteration, class, picks);
        }
        if strategy.dedups() {
            self.dedup_preserving_first();
        }
    }

    fn append(&mut self, iteration: usize, class: usize, picks: Vec<usize>) {
        if picks.is_empty() {
            return;
        }
        self.appended_total += picks.len();
        self.indices.extend(&picks);
        self.provenance.push(ProvenanceRecord {
            iteration,
            class,
            indices: picks,
        });
    }

    /// Drop repeat indices, keeping first occurrences, and prune the
    /// provenance records to match.
    fn dedup_preserving_first(&mut self) {
        let mut seen = std::collections::HashSet::new();
        for record in &mut self.provenance {
            record.indices.retain(|&i| seen.insert(i));
        }
        self.provenance.retain(|r| !r.indices.is_empty());
        self.indices.clear();
        for record in &self.provenance {
            self.indices.extend(&record.indices);
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn provenance(&self) -> &[ProvenanceRecord] {
        &self.provenance
    }

    /// Total rows appended over the sample's lifetime, counted before any
    /// deduplication. This is the draw count the sampling budget bounds.
    pub fn appended_total(&self) -> usize {
        self.appended_total
    }

    /// Number of distinct training rows currently in the sample.
    pub fn distinct_len(&self) -> usize {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// Audit dump: one `iteration,class,row_index` line per retained draw.
    pub fn write_provenance_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,class,row_index")?;
        for record in &self.provenance {
            for &idx in &record.indices {
                writeln!(w, "{},{},{}", record.iteration, record.class, idx)?;
            }
        }
        Ok(())
    }
}

fn class_rng(seed: u64, iteration: usize, class: usize) -> ChaCha8Rng {
    let step = derive_seed(seed, "mts-iteration", iteration as u64);
    ChaCha8Rng::seed_from_u64(derive_seed(step, "mts-class", class as u64))
}

/// Uniform draw of `count` distinct rows (all of them if fewer exist).
fn draw_without_replacement(rows: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if rows.len() <= count {
        return rows.to_vec();
    }
    rand::seq::index::sample(rng, rows.len(), count)
        .iter()
        .map(|i| rows[i])
        .collect()
}

/// The `count` rows with the lowest scores, ties toward the lower index.
fn lowest_by_score<F: Scalar>(rows: &[usize], scores: &[F], count: usize) -> Vec<usize> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    sorted.truncate(count);
    sorted
}

/// The `count` rows with the highest scores, ties toward the lower index.
fn highest_by_score<F: Scalar>(rows: &[usize], scores: &[F], count: usize) -> Vec<usize> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    sorted.truncate(count);
    sorted
}

/// For `count` evenly spaced quantile levels of the rows' score
/// distribution (0, 1/(count−1), …, 1; just level 0 when `count` is 1),
/// pick the row whose score lies nearest each interpolated quantile value.
/// The same row may serve several levels, so repeats are possible.
fn quantile_picks<F: Scalar>(rows: &[usize], scores: &[F], count: usize) -> Vec<usize> {
    let row_scores: Vec<F> = rows.iter().map(|&i| scores[i]).collect();
    let levels: Vec<f64> = if count == 1 {
        vec![0.0]
    } else {
        (0..count).map(|t| t as f64 / (count - 1) as f64).collect()
    };
    levels
        .into_iter()
        .map(|q| {
            let target = quantile(&row_scores, q);
            let mut best = rows[0];
            let mut best_gap = (scores[rows[0]] - target).abs();
            for &r in &rows[1..] {
                let gap = (scores[r] - target).abs();
                if gap < best_gap {
                    best = r;
                    best_gap = gap;
                }
            }
            best
        })
        .collect()
}
