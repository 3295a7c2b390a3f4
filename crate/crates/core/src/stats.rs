//! Shared statistics helpers: population moments, interpolated quantiles
//! and min-max rescaling. Conventions are pinned here once so the scorer,
//! the sampler and the evaluator all agree on them.

use crate::scalar::Scalar;

/// Arithmetic mean. Empty input yields zero.
pub fn mean<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    values.iter().copied().sum::<F>() / F::from_usize(values.len())
}

/// Population variance (divide by n, not n−1). Empty input yields zero.
pub fn population_variance<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    let mu = mean(values);
    let ss: F = values.iter().map(|&v| (v - mu) * (v - mu)).sum();
    ss / F::from_usize(values.len())
}

/// Quantile by linear interpolation between order statistics
/// (Hyndman–Fan type 7; the position is `q·(n−1)`).
///
/// `sorted` must be ascending and non-empty, `q` in [0, 1].
pub fn quantile_sorted<F: Scalar>(sorted: &[F], q: f64) -> F {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of [0,1]");
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    let frac = F::from_f64(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Quantile of an unsorted slice; sorts a copy.
pub fn quantile<F: Scalar>(values: &[F], q: f64) -> F {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    quantile_sorted(&sorted, q)
}

/// Rescale values to [0, 1] in place. When all values are equal the result
/// is all zeros (no element is more extreme than another).
pub fn min_max_normalize<F: Scalar>(values: &mut [F]) {
    let Some(&first) = values.first() else {
        return;
    };
    let (mut lo, mut hi) = (first, first);
    for &v in values.iter() {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if hi == lo {
        values.iter_mut().for_each(|v| *v = F::zero());
    } else {
        let span = hi - lo;
        values.iter_mut().for_each(|v| *v = (*v - lo) / span);
    }
}
