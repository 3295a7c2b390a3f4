//! Independent reference implementations used as test oracles.
//!
//! Everything here is written with plain scalar loops, straight from the
//! procedure definitions, and deliberately shares no code with the library
//! paths it checks.

#![allow(dead_code)]
// The transcriptions below use index loops on purpose: they mirror the
// written procedures line by line.
#![allow(clippy::needless_range_loop)]

use liit_core::{DenseNet, Matrix};

pub struct NaiveLad {
    pub scores: Vec<f64>,
    pub flags: Vec<bool>,
    pub threshold: f64,
    pub iterations: usize,
}

/// Clean-room transcription of the iterative rate-function scorer.
pub fn naive_lad(
    x: &[Vec<f64>],
    n_iter: usize,
    initial_threshold: f64,
    quantile_level: f64,
    variance_floor: f64,
    use_stddev: bool,
) -> NaiveLad {
    let n = x.len();
    let d = x[0].len();
    let mut scores = vec![0.0f64; n];
    let mut flags = vec![false; n];
    let mut threshold = initial_threshold;
    let mut iterations = 0;

    for _ in 0..n_iter {
        let unflagged: Vec<usize> = (0..n).filter(|&i| !flags[i]).collect();
        if unflagged.len() < 2 {
            break;
        }
        let mut rate = vec![f64::NEG_INFINITY; n];
        for j in 0..d {
            let mut sum = 0.0;
            for &i in &unflagged {
                sum += x[i][j];
            }
            let mu = sum / unflagged.len() as f64;
            let mut ss = 0.0;
            for &i in &unflagged {
                ss += (x[i][j] - mu) * (x[i][j] - mu);
            }
            let mut var = ss / unflagged.len() as f64;
            if var < variance_floor {
                var = variance_floor;
            }
            let divisor = if use_stddev { var.sqrt() } else { var };
            for i in 0..n {
                let z = (x[i][j] - mu) / divisor;
                let entropy = -(z * z) / (2.0 * n as f64);
                // The score keeps the largest rate-function projection.
                if -entropy > rate[i] {
                    rate[i] = -entropy;
                }
            }
        }

        let lo = rate.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == lo {
            rate.iter_mut().for_each(|v| *v = 0.0);
        } else {
            rate.iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
        }

        let mut sorted = rate.clone();
        sorted.sort_by(f64::total_cmp);
        let pos = quantile_level * (n - 1) as f64;
        let lo_i = pos.floor() as usize;
        let hi_i = pos.ceil() as usize;
        let q = if lo_i == hi_i {
            sorted[lo_i]
        } else {
            sorted[lo_i] + (pos - lo_i as f64) * (sorted[hi_i] - sorted[lo_i])
        };
        if q < threshold {
            threshold = q;
        }
        for i in 0..n {
            flags[i] = rate[i] > threshold;
        }
        scores = rate;
        iterations += 1;
    }

    NaiveLad {
        scores,
        flags,
        threshold,
        iterations,
    }
}

/// Exhaustive pairwise AUC: every (positive, negative) pair counts 1 when
/// ordered correctly and 1/2 on a tie.
pub fn pairwise_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores
        .iter()
        .zip(positives)
        .filter(|(_, &p)| p)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(positives)
        .filter(|(_, &p)| !p)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut correct = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                correct += 1.0;
            } else if p == n {
                correct += 0.5;
            }
        }
    }
    Some(correct / (pos.len() as f64 * neg.len() as f64))
}

/// Macro one-vs-rest pairwise AUC over the classes present, mirroring the
/// reduction the library uses but on top of the exhaustive pair counter.
pub fn macro_pairwise_auc(y_true: &[usize], proba: &Matrix<f64>) -> Option<f64> {
    if y_true.len() < 2 {
        return None;
    }
    let mut present: Vec<usize> = y_true.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return None;
    }
    if proba.cols() == 2 {
        let scores: Vec<f64> = (0..y_true.len()).map(|i| proba.get(i, 1)).collect();
        let positives: Vec<bool> = y_true.iter().map(|&y| y == 1).collect();
        return pairwise_auc(&scores, &positives);
    }
    let mut sum = 0.0;
    for &class in &present {
        let scores: Vec<f64> = (0..y_true.len()).map(|i| proba.get(i, class)).collect();
        let positives: Vec<bool> = y_true.iter().map(|&y| y == class).collect();
        sum += pairwise_auc(&scores, &positives)?;
    }
    Some(sum / present.len() as f64)
}

/// Unvectorized forward pass reading the network through its flat parameter
/// view (w1 row-major, b1, w2, b2, w3, b3).
pub fn scalar_forward(net: &DenseNet<f64>, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cfg = net.config();
    let (d, h1, h2, k) = (cfg.input_dim, cfg.hidden1, cfg.hidden2, cfg.output_dim);
    let o_w1 = 0;
    let o_b1 = o_w1 + d * h1;
    let o_w2 = o_b1 + h1;
    let o_b2 = o_w2 + h1 * h2;
    let o_w3 = o_b2 + h2;
    let o_b3 = o_w3 + h2 * k;
    let p = |i: usize| net.param(i);

    x.iter()
        .map(|row| {
            let mut a1 = vec![0.0f64; h1];
            for (h, a) in a1.iter_mut().enumerate() {
                let mut z = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    z += v * p(o_w1 + j * h1 + h);
                }
                z += p(o_b1 + h);
                *a = if z > 0.0 { z } else { 0.0 };
            }
            let mut a2 = vec![0.0f64; h2];
            for (h, a) in a2.iter_mut().enumerate() {
                let mut z = 0.0;
                for (j, &v) in a1.iter().enumerate() {
                    z += v * p(o_w2 + j * h2 + h);
                }
                z += p(o_b2 + h);
                *a = z.tanh();
            }
            let mut logits = vec![0.0f64; k];
            for (c, l) in logits.iter_mut().enumerate() {
                let mut z = 0.0;
                for (j, &v) in a2.iter().enumerate() {
                    z += v * p(o_w3 + j * k + c);
                }
                *l = z + p(o_b3 + c);
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / total).collect()
        })
        .collect()
}

/// Nearest-centroid classifier (train centroids, then closest by Euclidean
/// distance, ties to the lower class id).
pub fn nearest_centroid(
    train_x: &Matrix<f64>,
    train_y: &[usize],
    n_classes: usize,
    test_x: &Matrix<f64>,
) -> Vec<usize> {
    let d = train_x.cols();
    let mut centroids = vec![vec![0.0f64; d]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for i in 0..train_x.rows() {
        counts[train_y[i]] += 1;
        for j in 0..d {
            centroids[train_y[i]][j] += train_x.get(i, j);
        }
    }
    for (centroid, &count) in centroids.iter_mut().zip(&counts) {
        if count > 0 {
            centroid.iter_mut().for_each(|v| *v /= count as f64);
        }
    }
    (0..test_x.rows())
        .map(|i| {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (class, centroid) in centroids.iter().enumerate() {
                if counts[class] == 0 {
                    continue;
                }
                let dist: f64 = (0..d)
                    .map(|j| {
                        let diff = test_x.get(i, j) - centroid[j];
                        diff * diff
                    })
                    .sum();
                if dist < best_dist {
                    best = class;
                    best_dist = dist;
                }
            }
            best
        })
        .collect()
}

/// Deterministic pseudo-random matrix for oracle sweeps (splitmix64 core,
/// uniform in [-scale, scale]).
pub fn pseudo_random_matrix(seed: u64, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..rows)
        .map(|_| (0..cols).map(|_| (next() * 2.0 - 1.0) * scale).collect())
        .collect()
}
