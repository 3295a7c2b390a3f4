//! Large-deviations anomaly scoring (LAD).
//!
//! Each row receives the maximum, over feature columns, of its normalized
//! squared deviation scaled by 1/2n — a Gaussian rate-function value
//! projected per dimension with the largest projection kept. Scores are
//! min-max rescaled to [0, 1] and rows above a shrinking 0.95-quantile
//! threshold are flagged; the column statistics are then re-estimated on the
//! unflagged rows and the loop repeats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::stats::{mean, min_max_normalize, population_variance, quantile};

/// Column divisor used during normalization. The variance form is the
/// default; the standard-deviation form is exactly scale-free per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divisor {
    #[default]
    Variance,
    StdDev,
}

/// Whether scores are computed independently within each class or over the
/// whole matrix at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringScope {
    #[default]
    PerClass,
    Global,
}

/// Scorer configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct LadConfig<F> {
    /// Number of re-estimation iterations.
    pub n_iter: usize,
    /// Starting threshold; shrinks toward the 0.95 score quantile.
    pub initial_threshold: F,
    /// Quantile the threshold shrinks to each iteration.
    pub quantile_level: f64,
    /// Lower bound applied to column variances before dividing.
    pub variance_floor: F,
    pub divisor: Divisor,
    pub scope: ScoringScope,
}

impl<F: Scalar> Default for LadConfig<F> {
    fn default() -> Self {
        Self {
            n_iter: 5,
            initial_threshold: F::one(),
            quantile_level: 0.95,
            variance_floor: F::from_f64(1e-12),
            divisor: Divisor::Variance,
            scope: ScoringScope::PerClass,
        }
    }
}

impl<F: Scalar> LadConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter < 1 {
            return Err(Error::Config("lad.n_iter must be >= 1".into()));
        }
        let th_valid = self.initial_threshold > F::zero() && self.initial_threshold <= F::one();
        if !th_valid {
            return Err(Error::Config(
                "lad.initial_threshold must lie in (0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.quantile_level) {
            return Err(Error::Config("lad.quantile_level must lie in [0, 1]".into()));
        }
        if !self.variance_floor.is_finite() || self.variance_floor <= F::zero() {
            return Err(Error::Config("lad.variance_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Per-row anomaly scores in [0, 1] plus flags for rows whose score exceeded
/// the final threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector<F> {
    pub scores: Vec<F>,
    pub flags: Vec<bool>,
    pub iterations_run: usize,
}

impl<F: Scalar> ScoreVector<F> {
    fn zeros(n: usize) -> Self {
        Self {
            scores: vec![F::zero(); n],
            flags: vec![false; n],
            iterations_run: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Score every row of `x`.
///
/// Per iteration: statistics are estimated on the unflagged rows only, every
/// row of column j is normalized as `(x − mean_j) / divisor_j`, the row score
/// is the largest normalized squared deviation over columns divided by 2n,
/// scores are min-max rescaled, the threshold shrinks to
/// `min(th, quantile(scores, 0.95))`, and flags are recomputed fresh as
/// `score > th`. The loop stops early once fewer than two rows remain
/// unflagged, returning the state of the last completed iteration.
pub fn lad_scores<F: Scalar>(x: &Matrix<F>, cfg: &LadConfig<F>) -> Result<ScoreVector<F>> {
    cfg.validate()?;
    let n = x.rows();
    let d = x.cols();
    if n < 2 {
        return Err(Error::TooFewRows {
            context: "lad_scores".into(),
            needed: 2,
            got: n,
        });
    }
    if d < 1 {
        return Err(Error::Shape {
            context: "lad_scores".into(),
            expected: "at least one column".into(),
            got: "0 columns".into(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite {
            row: 0,
            column: "input matrix".into(),
        });
    }

    let two_n = F::from_usize(2 * n);
    let mut result = ScoreVector::zeros(n);
    let mut threshold = cfg.initial_threshold;
    let mut column_buf: Vec<F> = Vec::with_capacity(n);
    let mut scores = vec![F::zero(); n];

    for _ in 0..cfg.n_iter {
        if result.flags.iter().filter(|f| !**f).count() < 2 {
            break; // all (or all but one) rows flagged: statistics degenerate
        }

        scores.iter_mut().for_each(|s| *s = F::zero());
        for j in 0..d {
            column_buf.clear();
            for i in 0..n {
                if !result.flags[i] {
                    column_buf.push(x.get(i, j));
                }
            }
            let mu = mean(&column_buf);
            let var = population_variance(&column_buf).max(cfg.variance_floor);
            let div = match cfg.divisor {
                Divisor::Variance => var,
                Divisor::StdDev => var.sqrt(),
            };
            for (i, s) in scores.iter_mut().enumerate() {
                let z = (x.get(i, j) - mu) / div;
                let rate = z * z / two_n;
                if rate > *s {
                    *s = rate;
                }
            }
        }

        min_max_normalize(&mut scores);
        threshold = threshold.min(quantile(&scores, cfg.quantile_level));
        for (flag, &s) in result.flags.iter_mut().zip(&scores) {
            *flag = s > threshold;
        }
        result.scores.copy_from_slice(&scores);
        result.iterations_run += 1;
    }

    Ok(result)
}

/// Score each class independently and scatter the class-local scores back to
/// global row positions. Classes with fewer than two members get score 0 and
/// no flag. Scores are comparable only within a class.
///
/// `iterations_run` reports the largest per-class iteration count.
pub fn lad_scores_by_class<F: Scalar>(
    x: &Matrix<F>,
    labels: &[usize],
    cfg: &LadConfig<F>,
) -> Result<ScoreVector<F>> {
    assert_eq!(labels.len(), x.rows(), "labels must align with rows");
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut result = ScoreVector::zeros(x.rows());
    for class in 0..n_classes {
        let rows: Vec<usize> = (0..x.rows()).filter(|&i| labels[i] == class).collect();
        if rows.len() < 2 {
            continue; // score 0, unflagged
        }
        let sub = x.gather_rows(&rows);
        let class_scores = lad_scores(&sub, cfg)?;
        for (local, &global) in rows.iter().enumerate() {
            result.scores[global] = class_scores.scores[local];
            result.flags[global] = class_scores.flags[local];
        }
        result.iterations_run = result.iterations_run.max(class_scores.iterations_run);
    }
    Ok(result)
}

/// Score a dataset according to `cfg.scope`.
pub fn score_dataset<F: Scalar>(
    ds: &crate::dataset::TabularDataset<F>,
    cfg: &LadConfig<F>,
) -> Result<ScoreVector<F>> {
    match cfg.scope {
        ScoringScope::PerClass => lad_scores_by_class(ds.features(), ds.labels(), cfg),
        ScoringScope::Global => lad_scores(ds.features(), cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(values: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(values.len(), 1, values.to_vec())
    }

    #[test]
    fn hand_case_single_outlier() {
        // μ=2, var=16, z = [−0.125 ×4, 0.5]; rate ∝ z²; min-max → {0, 1}.
        let x = one_dim(&[0.0, 0.0, 0.0, 0.0, 10.0]);
        let cfg = LadConfig {
            n_iter: 1,
            ..LadConfig::default()
        };
        let sv = lad_scores(&x, &cfg).unwrap();
        assert_eq!(sv.scores, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(sv.flags, vec![false, false, false, false, true]);
        assert_eq!(sv.iterations_run, 1);
    }

    #[test]
    fn identical_rows_score_zero() {
        let x = Matrix::from_rows(&vec![vec![3.0f64, 4.0]; 6]);
        let sv = lad_scores(&x, &LadConfig::default()).unwrap();
        assert!(sv.scores.iter().all(|&s| s == 0.0));
        assert!(sv.flags.iter().all(|&f| !f));
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let x = Matrix::from_rows(&[
            vec![1.0f64, -5.0],
            vec![2.0, 0.0],
            vec![1.5, 0.5],
            vec![40.0, 0.2],
            vec![1.2, 0.1],
            vec![1.7, 100.0],
        ]);
        let sv = lad_scores(&x, &LadConfig::default()).unwrap();
        assert!(sv.scores.iter().all(|&s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn flags_imply_scores_above_zero() {
        let x = one_dim(&[0.0, 0.1, 0.2, 0.15, 9.0, -7.0]);
        let sv = lad_scores(&x, &LadConfig::default()).unwrap();
        for (i, &f) in sv.flags.iter().enumerate() {
            if f {
                assert!(sv.scores[i] > 0.0);
            }
        }
    }

    #[test]
    fn too_few_rows_and_non_finite_are_rejected() {
        let x = one_dim(&[1.0]);
        assert!(matches!(
            lad_scores(&x, &LadConfig::default()),
            Err(Error::TooFewRows { .. })
        ));
        let bad = one_dim(&[1.0, f64::NAN]);
        assert!(matches!(
            lad_scores(&bad, &LadConfig::default()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn by_class_reduces_to_global_for_single_class() {
        let x = one_dim(&[0.0, 1.0, 2.0, 50.0]);
        let labels = vec![0usize; 4];
        let cfg = LadConfig::default();
        let per_class = lad_scores_by_class(&x, &labels, &cfg).unwrap();
        let global = lad_scores(&x, &cfg).unwrap();
        assert_eq!(per_class.scores, global.scores);
        assert_eq!(per_class.flags, global.flags);
    }

    #[test]
    fn singleton_class_gets_zero_score() {
        let x = one_dim(&[0.0, 0.1, 0.2, 8.0, 99.0]);
        let labels = vec![0, 0, 0, 0, 1];
        let sv = lad_scores_by_class(&x, &labels, &LadConfig::default()).unwrap();
        assert_eq!(sv.scores[4], 0.0);
        assert!(!sv.flags[4]);
        // The other class is scored as usual: its outlier gets score 1.
        assert_eq!(sv.scores[3], 1.0);
    }

    #[test]
    fn per_class_outliers_score_one_within_each_class() {
        // Each class embeds the 1-D hand case in both columns: a tight blob
        // plus one far outlier.
        let mut rows = vec![vec![0.0f64, 0.0]; 4];
        rows.push(vec![10.0, 10.0]);
        rows.extend(vec![vec![100.0f64, 50.0]; 4]);
        rows.push(vec![130.0, 20.0]);
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let x = Matrix::from_rows(&rows);
        let sv = lad_scores_by_class(&x, &labels, &LadConfig::default()).unwrap();
        assert_eq!(sv.scores[4], 1.0, "class-0 outlier maximal within class");
        assert_eq!(sv.scores[9], 1.0, "class-1 outlier maximal within class");
        for &i in &[0usize, 1, 2, 3, 5, 6, 7, 8] {
            assert_eq!(sv.scores[i], 0.0, "blob rows minimal, row {i}");
        }
    }
}
