//! Point estimators and the block machinery behind median-of-means.
//!
//! Medians are *lower* medians throughout: for an even count `n` the
//! `n/2`-th order statistic is returned, for odd `n` the `(n+1)/2`-th.

use std::ops::{Deref, Range};

use crate::error::{invalid, Error, Result};

/// Ordered sample of finite rewards.
///
/// Insertion order is significant: block partitions are positional.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset(Vec<f64>);

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { index: self.0.len(), value });
        }
        self.0.push(value);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Dataset {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Dataset {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for Dataset {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// Contiguous partition of `0..n` into `k` blocks; the first `n % k` blocks
/// hold one extra element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    bounds: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid(format!("block count k={k} must satisfy 1 <= k <= n={n}")));
        }
        let bounds = (0..k).map(|block| block_range(n, k, block)).collect();
        Ok(Self { n, bounds })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Range<usize>] {
        &self.bounds
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bounds.iter().map(|r| r.len()).collect()
    }

    /// Smallest block size, `floor(n / k)`.
    pub fn min_block_size(&self) -> usize {
        self.n / self.bounds.len()
    }

    pub fn block_means(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n, "partition built for a different sample size");
        self.bounds.iter().map(|r| block_mean(&values[r.clone()])).collect()
    }
}

/// Index range of block `block` in the contiguous layout, without allocating.
pub(crate) fn block_range(n: usize, k: usize, block: usize) -> Range<usize> {
    let small = n / k;
    let extra = n % k;
    let start = block * small + block.min(extra);
    let len = small + usize::from(block < extra);
    start..start + len
}

/// Left-to-right sum divided by the length. Every block mean in the crate goes
/// through here so that equal blocks produce bitwise-equal means.
#[inline]
pub(crate) fn block_mean(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    for &v in values {
        sum += v;
    }
    sum / values.len() as f64
}

/// Zero-based position of the lower median among `len` sorted values.
#[inline]
pub(crate) fn lower_median_rank(len: usize) -> usize {
    (len - 1) / 2
}

/// Lower median of a nonempty list; the input is left untouched.
pub fn lower_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median of an empty list"));
    }
    let mut scratch = values.to_vec();
    Ok(lower_median_in_place(&mut scratch))
}

/// Lower median that reorders its argument.
pub(crate) fn lower_median_in_place(values: &mut [f64]) -> f64 {
    let rank = lower_median_rank(values.len());
    *values.select_nth_unstable_by(rank, f64::total_cmp).1
}

pub fn partition_blocks(n: usize, k: usize) -> Result<BlockPartition> {
    BlockPartition::new(n, k)
}

/// Median-of-means with `k` contiguous blocks.
pub fn mom(values: &[f64], k: usize) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Empty("median-of-means of an empty sample"));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("block count k={k} must satisfy 1 <= k <= n={n}")));
    }
    let mut means = Vec::with_capacity(k);
    Ok(mom_with_scratch(values, k, &mut means))
}

/// Allocation-free median-of-means for hot loops. Caller guarantees
/// `1 <= k <= values.len()`.
pub(crate) fn mom_with_scratch(values: &[f64], k: usize, means: &mut Vec<f64>) -> f64 {
    let n = values.len();
    means.clear();
    means.extend((0..k).map(|block| block_mean(&values[block_range(n, k, block)])));
    lower_median_in_place(means)
}

pub fn empirical_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("mean of an empty sample"));
    }
    Ok(block_mean(values))
}

/// Truncated empirical mean: observation `t` (1-based) contributes only when
/// `|X_t| <= (M t / ln(1/delta))^(1/(1+a))`.
pub fn truncated_mean(values: &[f64], moment_bound: f64, a: f64, delta: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("truncated mean of an empty sample"));
    }
    if !(moment_bound > 0.0 && moment_bound.is_finite()) {
        return Err(invalid(format!("moment bound M={moment_bound} must be positive")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(invalid(format!("moment order a={a} must lie in (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta={delta} must lie in (0, 1)")));
    }
    let log_inv_delta = (1.0 / delta).ln();
    let exponent = 1.0 / (1.0 + a);
    let mut sum = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let t = (i + 1) as f64;
        let level = (moment_bound * t / log_inv_delta).powf(exponent);
        if x.abs() <= level {
            sum += x;
        }
    }
    Ok(sum / values.len() as f64)
}
