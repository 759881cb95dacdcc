//! Pooling operators that reduce a convolution output to a scalar.

use crate::error::{Error, Result};

fn non_empty(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        Err(Error::EmptyOutput)
    } else {
        Ok(())
    }
}

/// Proportion of outputs strictly greater than `bias`.
pub fn ppv(y: &[f64], bias: f64) -> Result<f64> {
    non_empty(y)?;
    Ok(ppv_unchecked(y, bias))
}

#[inline]
pub(crate) fn ppv_unchecked(y: &[f64], bias: f64) -> f64 {
    let count: usize = y.iter().map(|&v| usize::from(v > bias)).sum();
    count as f64 / y.len() as f64
}

pub fn max_pool(y: &[f64]) -> Result<f64> {
    non_empty(y)?;
    Ok(max_unchecked(y))
}

#[inline]
pub(crate) fn max_unchecked(y: &[f64]) -> f64 {
    y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Mean of the strictly positive outputs, or 0 when there are none.
pub fn mpv(y: &[f64]) -> f64 {
    let (sum, count) = y
        .iter()
        .filter(|&&v| v > 0.0)
        .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Mean 0-based index of the strictly positive outputs, or -1 when there are none.
pub fn mipv(y: &[f64]) -> f64 {
    let (sum, count) = y
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .fold((0usize, 0usize), |(s, c), (i, _)| (s + i, c + 1));
    if count == 0 {
        -1.0
    } else {
        sum as f64 / count as f64
    }
}

/// Length of the longest run of consecutive strictly positive outputs.
pub fn lspv(y: &[f64]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &v in y {
        if v > 0.0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Empirical quantile with linear interpolation between order statistics:
/// position `q * (n - 1)` in the sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// [`quantile_sorted`] for each of `qs`, sorting a copy of `y` once.
pub fn quantiles(y: &[f64], qs: &[f64]) -> Result<Vec<f64>> {
    non_empty(y)?;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(qs.iter().map(|&q| quantile_sorted(&sorted, q)).collect())
}
