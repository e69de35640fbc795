//! One-sided resampled median-of-means (RMM) test and upper confidence bound.
//!
//! Given a sample `X_1..X_n` that is symmetric about its mean `mu`, the test
//! of `H0: mu <= theta` builds `m - 1` *alternative samples* by reflecting
//! each observation about `theta` with an independent Rademacher sign,
//!
//! ```text
//! D_j(theta)_i = alpha_ij (X_i - theta) + theta,
//! ```
//!
//! and compares the median-of-means displacement of the original sample,
//! `S_0(theta) = MoM(D_0) - theta`, against those of the alternatives. Ties
//! are resolved by a uniformly random permutation `pi` of `0..m`. At
//! `theta = mu` the rank of `S_0` is uniform on `1..=m`, so rejecting when the
//! rank exceeds `m - r` has level exactly `r / m` for every `n`.
//!
//! Reusing the same signs for every `theta`, the accepted set is a half-line
//! `(-inf, U)` or `(-inf, U]`, and [`rmm_ucb`] computes `U` in closed form
//! from the intersection points of `S_0` with the per-block lines of each
//! alternative. [`rmm_ucb_oracle`] recovers it by brute force on a grid.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::estimators::{block_mean, block_range, mom_with_scratch, Dataset};

/// Real number extended with `-inf` and `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Self::PosInf
        } else if x == f64::NEG_INFINITY {
            Self::NegInf
        } else {
            debug_assert!(!x.is_nan());
            Self::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Self::NegInf => f64::NEG_INFINITY,
            Self::Finite(x) => x,
            Self::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }

    pub fn shift(self, c: f64) -> Self {
        match self {
            Self::Finite(x) => Self::Finite(x + c),
            inf => inf,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInf => f.write_str("-inf"),
            Self::Finite(x) => write!(f, "{x}"),
            Self::PosInf => f.write_str("+inf"),
        }
    }
}

/// Rademacher signs for the `m - 1` alternative samples, bit-packed
/// column by column (bit set = `+1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    n: usize,
    columns: usize,
    words_per_column: usize,
    bits: Vec<u64>,
}

impl SignAssignment {
    /// Draws `n * columns` independent fair signs. Columns are drawn in order,
    /// each as `ceil(n / 64)` consecutive `u64` words with observation `i` in
    /// bit `i % 64` of word `i / 64`.
    pub fn random<R: Rng + ?Sized>(n: usize, columns: usize, rng: &mut R) -> Self {
        let words_per_column = n.div_ceil(64);
        let mut bits = vec![0u64; words_per_column * columns];
        let tail_mask = tail_mask(n);
        rng.fill(&mut bits[..]);
        if words_per_column > 0 {
            for column in bits.chunks_exact_mut(words_per_column) {
                column[words_per_column - 1] &= tail_mask;
            }
        }
        Self { n, columns, words_per_column, bits }
    }

    /// Builds an assignment from explicit `±1` columns.
    pub fn from_columns(n: usize, columns: &[Vec<i8>]) -> Result<Self> {
        let words_per_column = n.div_ceil(64);
        let mut bits = vec![0u64; words_per_column * columns.len()];
        for (j, column) in columns.iter().enumerate() {
            if column.len() != n {
                return Err(invalid(format!(
                    "sign column {j} has length {}, expected {n}",
                    column.len()
                )));
            }
            for (i, &s) in column.iter().enumerate() {
                match s {
                    1 => bits[j * words_per_column + i / 64] |= 1 << (i % 64),
                    -1 => {}
                    other => return Err(invalid(format!("sign {other} is not ±1"))),
                }
            }
        }
        Ok(Self { n, columns: columns.len(), words_per_column, bits })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Sign of observation `i` in alternative column `column` (zero-based;
    /// column `c` belongs to alternative sample `c + 1`).
    pub fn sign(&self, i: usize, column: usize) -> i8 {
        if self.bit(i, column) {
            1
        } else {
            -1
        }
    }

    pub fn column(&self, column: usize) -> Vec<i8> {
        (0..self.n).map(|i| self.sign(i, column)).collect()
    }

    #[inline]
    fn bit(&self, i: usize, column: usize) -> bool {
        assert!(i < self.n && column < self.columns);
        (self.bits[column * self.words_per_column + i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    fn column_words(&self, column: usize) -> &[u64] {
        let start = column * self.words_per_column;
        &self.bits[start..start + self.words_per_column]
    }
}

fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Uniformly random permutation `pi` of `0..m` used to break ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieBreaker {
    pi: Vec<u32>,
}

impl TieBreaker {
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut pi: Vec<u32> = (0..m as u32).collect();
        pi.shuffle(rng);
        Self { pi }
    }

    pub fn from_permutation(pi: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; pi.len()];
        for &p in &pi {
            let slot = seen
                .get_mut(p as usize)
                .ok_or_else(|| invalid(format!("{p} out of range for permutation of {}", pi.len())))?;
            if std::mem::replace(slot, true) {
                return Err(invalid(format!("{p} repeated in permutation")));
            }
        }
        Ok(Self { pi })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `pi(j)` for sample index `j` (0 = original sample).
    #[inline]
    pub fn priority(&self, j: usize) -> u32 {
        self.pi[j]
    }

    /// `x_j ≺_π x_l`.
    #[inline]
    pub fn precedes(&self, xj: f64, j: usize, xl: f64, l: usize) -> bool {
        xj < xl || (xj == xl && self.pi[j] < self.pi[l])
    }
}

/// Significance level `p = r / m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfidenceSpec {
    r: usize,
    m: usize,
}

impl ConfidenceSpec {
    pub fn new(r: usize, m: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(invalid(format!("confidence spec needs 1 <= r <= m, got r={r}, m={m}")));
        }
        Ok(Self { r, m })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> f64 {
        self.r as f64 / self.m as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestOutcome {
    Accept,
    Reject,
}

/// Everything the test and the bound consume. Immutable once built.
#[derive(Clone, Debug)]
pub struct RmmContext {
    data: Dataset,
    signs: SignAssignment,
    tie: TieBreaker,
    conf: ConfidenceSpec,
    k: usize,
    mom0: f64,
}

impl RmmContext {
    pub fn new(
        data: Dataset,
        signs: SignAssignment,
        tie: TieBreaker,
        conf: ConfidenceSpec,
        k: usize,
    ) -> Result<Self> {
        let n = data.len();
        if n == 0 {
            return Err(invalid("RMM context needs a nonempty sample"));
        }
        if k == 0 || k > n {
            return Err(invalid(format!("block count k={k} must satisfy 1 <= k <= n={n}")));
        }
        if signs.rows() != n || signs.columns() + 1 != conf.m() {
            return Err(invalid(format!(
                "sign matrix is {}x{}, expected {n}x{}",
                signs.rows(),
                signs.columns(),
                conf.m() - 1
            )));
        }
        if tie.len() != conf.m() {
            return Err(invalid(format!(
                "tie-breaking permutation has {} entries, expected m={}",
                tie.len(),
                conf.m()
            )));
        }
        let mom0 = mom_with_scratch(&data, k, &mut Vec::with_capacity(k));
        Ok(Self { data, signs, tie, conf, k, mom0 })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn signs(&self) -> &SignAssignment {
        &self.signs
    }

    pub fn tie_breaker(&self) -> &TieBreaker {
        &self.tie
    }

    pub fn conf(&self) -> ConfidenceSpec {
        self.conf
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Median-of-means of the original sample.
    pub fn mom0(&self) -> f64 {
        self.mom0
    }

    fn alternative_into(&self, column: usize, theta: f64, out: &mut Vec<f64>) {
        out.clear();
        let words = self.signs.column_words(column);
        out.extend(self.data.iter().enumerate().map(|(i, &x)| {
            if (words[i / 64] >> (i % 64)) & 1 == 1 {
                x
            } else {
                reflect(x, theta)
            }
        }));
    }

    /// Alternative sample `D_{column+1}(theta)`.
    pub fn alternative(&self, column: usize, theta: f64) -> Dataset {
        let mut out = Vec::with_capacity(self.data.len());
        self.alternative_into(column, theta, &mut out);
        Dataset::new(out).expect("reflection of finite data at finite theta is finite")
    }
}

#[inline]
fn reflect(x: f64, theta: f64) -> f64 {
    theta - (x - theta)
}

/// `alpha_i (X_i - theta) + theta` element-wise. A `+1` sign returns the
/// observation bit-for-bit so that identical samples tie exactly.
pub fn alternative_sample(data: &[f64], signs: &[i8], theta: f64) -> Result<Dataset> {
    if data.len() != signs.len() {
        return Err(invalid(format!(
            "sample has {} observations but {} signs",
            data.len(),
            signs.len()
        )));
    }
    let mut out = Vec::with_capacity(data.len());
    for (&x, &s) in data.iter().zip(signs) {
        out.push(match s {
            1 => x,
            -1 => reflect(x, theta),
            other => return Err(invalid(format!("sign {other} is not ±1"))),
        });
    }
    Dataset::new(out)
}

/// `S(theta) = MoM(sample, k) - theta`.
pub fn reference_stat(sample: &[f64], theta: f64, k: usize) -> Result<f64> {
    Ok(crate::estimators::mom(sample, k)? - theta)
}

/// `R(theta) = 1 + #{ j in 1..m : S_0(theta) ≺_π S_j(theta) }`.
pub fn rank(ctx: &RmmContext, theta: f64) -> usize {
    let mut alt = Vec::with_capacity(ctx.data.len());
    let mut means = Vec::with_capacity(ctx.k);
    rank_with_scratch(ctx, theta, &mut alt, &mut means)
}

fn rank_with_scratch(ctx: &RmmContext, theta: f64, alt: &mut Vec<f64>, means: &mut Vec<f64>) -> usize {
    let s0 = ctx.mom0 - theta;
    let mut above = 0;
    for column in 0..ctx.signs.columns() {
        ctx.alternative_into(column, theta, alt);
        let sj = mom_with_scratch(alt, ctx.k, means) - theta;
        if ctx.tie.precedes(s0, 0, sj, column + 1) {
            above += 1;
        }
    }
    1 + above
}

/// Algorithm-level test: reject `H0: mu <= theta` iff `R(theta) > m - r`.
pub fn rmm_test(ctx: &RmmContext, theta: f64) -> TestOutcome {
    if rank(ctx, theta) > ctx.conf.m() - ctx.conf.r() {
        TestOutcome::Reject
    } else {
        TestOutcome::Accept
    }
}

/// One contiguous run of at most eight observations that lies inside a single
/// block and inside a single byte of the packed sign words.
#[derive(Clone, Copy)]
struct Chunk {
    word: u32,
    shift: u32,
    mask: u32,
}

const CHUNK_BITS: usize = 8;
const PATTERNS: usize = 1 << CHUNK_BITS;

const POPCOUNT: [u8; PATTERNS] = {
    let mut table = [0u8; PATTERNS];
    let mut i = 0;
    while i < PATTERNS {
        table[i] = (i as u32).count_ones() as u8;
        i += 1;
    }
    table
};

/// Per-block intersection points of `S_0` with one alternative's block lines.
struct BlockLines<'a> {
    chunks: Vec<Chunk>,
    block_chunks: Vec<(usize, usize)>,
    block_lens: Vec<f64>,
    block_counts: Vec<u32>,
    parallel: Vec<f64>,
    tables: Vec<f64>,
    mom0: f64,
    words: &'a [u64],
    coincident: f64,
}

impl<'a> BlockLines<'a> {
    fn new(data: &[f64], k: usize, mom0: f64) -> Self {
        let n = data.len();
        let mut chunks = Vec::with_capacity(n / CHUNK_BITS + k);
        let mut block_chunks = Vec::with_capacity(k);
        let mut block_lens = Vec::with_capacity(k);
        let mut block_counts = Vec::with_capacity(k);
        let mut parallel = Vec::with_capacity(k);
        let mut tables = Vec::with_capacity((n / CHUNK_BITS + k) * PATTERNS);
        for block in 0..k {
            let range = block_range(n, k, block);
            block_lens.push(range.len() as f64);
            block_counts.push(range.len() as u32);
            // all signs +1: the block line is parallel to S_0
            let gap = mom0 - block_mean(&data[range.clone()]);
            parallel.push(if gap > 0.0 {
                f64::INFINITY
            } else if gap < 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
            let first = chunks.len();
            let mut offset = range.start;
            while offset < range.end {
                let end = ((offset / CHUNK_BITS + 1) * CHUNK_BITS).min(range.end);
                let len = end - offset;
                chunks.push(Chunk { word: (offset / 64) as u32, shift: (offset % 64) as u32, mask: (1 << len) - 1 });
                let xs = &data[offset..end];
                for pattern in 0..PATTERNS {
                    let mut s = 0.0;
                    if pattern < 1 << len {
                        for (bit, &x) in xs.iter().enumerate() {
                            if (pattern >> bit) & 1 == 1 {
                                s += x;
                            } else {
                                s -= x;
                            }
                        }
                    }
                    tables.push(s);
                }
                offset = end;
            }
            block_chunks.push((first, chunks.len()));
        }
        Self {
            chunks,
            block_chunks,
            block_lens,
            block_counts,
            parallel,
            tables,
            mom0,
            words: &[],
            coincident: 0.0,
        }
    }

    fn set_column(&mut self, words: &'a [u64], coincident: f64) {
        self.words = words;
        self.coincident = coincident;
    }

    #[inline]
    fn intersection(&self, block: usize) -> f64 {
        let (first, last) = self.block_chunks[block];
        let chunks = &self.chunks[first..last];
        let tables = &self.tables[first * PATTERNS..last * PATTERNS];
        let lookup = |c: usize| {
            let chunk = chunks[c];
            let pattern = ((self.words[chunk.word as usize] >> chunk.shift) as u32 & chunk.mask) as usize;
            (tables[c * PATTERNS + pattern], POPCOUNT[pattern] as u32)
        };
        // four independent partial sums keep the adds off one dependency chain
        let mut partial = [0.0f64; 4];
        let mut positives = 0u32;
        let full = chunks.len() / 4 * 4;
        for c in (0..full).step_by(4) {
            for (lane, acc) in partial.iter_mut().enumerate() {
                let (s, p) = lookup(c + lane);
                *acc += s;
                positives += p;
            }
        }
        for c in full..chunks.len() {
            let (s, p) = lookup(c);
            partial[c - full] += s;
            positives += p;
        }
        let signed_sum = (partial[0] + partial[1]) + (partial[2] + partial[3]);
        let negatives = self.block_counts[block] - positives;
        if negatives == 0 {
            let p = self.parallel[block];
            if p.is_nan() {
                self.coincident
            } else {
                p
            }
        } else {
            (self.block_lens[block] * self.mom0 - signed_sum) / (2 * negatives) as f64
        }
    }
}

/// `(u, pi)` ordered by `≺_π`.
#[inline]
fn pi_less(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Closed-form `U = sup { theta : R(theta) <= m - r }`.
///
/// For block `l` of alternative `j` the block line meets `S_0` at
///
/// ```text
/// U_lj = (|B_l| MoM(D_0) - sum_{i in B_l} alpha_ij X_i) / (2 #{i in B_l : alpha_ij = -1})
/// ```
///
/// with `±c/0 = ±inf` and, when the lines coincide, `+inf` exactly when the
/// block loses ties to `S_0` (`pi(0) > pi(j)`). `S_0` beats `S_j` on
/// `(-inf, U_j]` where `U_j` is the `ceil(k/2)`-th largest `U_lj`, and the
/// bound is the `(m - r)`-th smallest `U_j` under `≺_π`, i.e. the `r`-th
/// largest.
///
/// Only the `r` largest `U_j` matter. An alternative is evaluated in full
/// only once enough of its blocks clear the running `r`-th largest value;
/// the rest are abandoned as soon as they cannot.
pub fn rmm_ucb(ctx: &RmmContext) -> Result<ExtendedReal> {
    let (r, m) = (ctx.conf.r(), ctx.conf.m());
    if r >= m {
        return Err(invalid(format!("upper bound needs r < m, got r={r}, m={m}")));
    }
    let k = ctx.k;
    let mut lines = BlockLines::new(ctx.data.values(), k, ctx.mom0);

    let tie = &ctx.tie;
    let pi0 = tie.priority(0);
    let median_rank = k / 2;
    // U_j >= t  iff  at least `need` block values are >= t
    let need = k - median_rank;
    let mut per_block = vec![0.0f64; k];
    // the r largest (U_j, pi(j)) seen so far, ascending
    let mut top: Vec<(f64, u32)> = Vec::with_capacity(r + 1);

    for column in 0..ctx.signs.columns() {
        let pij = tie.priority(column + 1);
        let coincident = if pi0 > pij { f64::INFINITY } else { f64::NEG_INFINITY };
        lines.set_column(ctx.signs.column_words(column), coincident);

        if top.len() == r {
            let (threshold, threshold_pi) = top[0];
            // U_j beats the threshold iff U_j > t, or U_j == t and pi(j) > pi_t
            let inclusive = pij > threshold_pi;
            let mut hits = 0;
            let mut misses = 0;
            let mut filled = 0;
            // blocks go in small branch-free groups between exit checks
            while filled < k && hits < need && misses <= k - need {
                let group_end = (filled + 4).min(k);
                for (block, slot) in (filled..group_end).zip(&mut per_block[filled..group_end]) {
                    let u = lines.intersection(block);
                    *slot = u;
                    let hit = (u > threshold) | (inclusive & (u == threshold));
                    hits += hit as usize;
                    misses += !hit as usize;
                }
                filled = group_end;
            }
            if hits < need {
                continue;
            }
            for (block, slot) in per_block.iter_mut().enumerate().skip(filled) {
                *slot = lines.intersection(block);
            }
        } else {
            for (block, slot) in per_block.iter_mut().enumerate() {
                *slot = lines.intersection(block);
            }
        }
        let uj = *per_block.select_nth_unstable_by(median_rank, f64::total_cmp).1;
        let entry = (uj, pij);
        if top.len() == r {
            top.remove(0);
        }
        let at = top.partition_point(|&e| pi_less(e, entry));
        top.insert(at, entry);
    }

    Ok(ExtendedReal::from_f64(top[0].0))
}

/// Default grid for [`rmm_ucb_oracle`]: ten data ranges on either side.
pub fn default_oracle_bounds(data: &[f64]) -> (f64, f64) {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    (lo - 10.0 * range, hi + 10.0 * range)
}

/// Grid point `i` of `steps` evenly spaced points on `[lo, hi]`.
pub fn grid_point(lo: f64, hi: f64, steps: usize, i: usize) -> f64 {
    if i + 1 == steps {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (steps - 1) as f64)
    }
}

/// Brute-force `sup { theta : R(theta) <= m - r }` over a uniform grid:
/// the largest accepted grid point, `+inf` if the top point is accepted and
/// `-inf` if nothing is.
pub fn rmm_ucb_oracle(ctx: &RmmContext, lo: f64, hi: f64, steps: usize) -> Result<ExtendedReal> {
    if lo.partial_cmp(&hi) != Some(Ordering::Less) || steps < 2 {
        return Err(invalid(format!("oracle grid needs lo < hi and steps >= 2, got [{lo}, {hi}] x {steps}")));
    }
    let threshold = ctx.conf.m() - ctx.conf.r();
    let mut alt = Vec::with_capacity(ctx.data.len());
    let mut means = Vec::with_capacity(ctx.k);
    for i in (0..steps).rev() {
        let theta = grid_point(lo, hi, steps, i);
        if rank_with_scratch(ctx, theta, &mut alt, &mut means) <= threshold {
            return Ok(if i + 1 == steps { ExtendedReal::PosInf } else { ExtendedReal::Finite(theta) });
        }
    }
    Ok(ExtendedReal::NegInf)
}

/// Draws signs (column-major) and then the permutation from `rng`.
pub fn build_context<R: Rng + ?Sized>(
    data: Dataset,
    conf: ConfidenceSpec,
    k: usize,
    rng: &mut R,
) -> Result<RmmContext> {
    let signs = SignAssignment::random(data.len(), conf.m() - 1, rng);
    let tie = TieBreaker::random(conf.m(), rng);
    RmmContext::new(data, signs, tie, conf, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn ds(v: &[f64]) -> Dataset {
        Dataset::new(v.to_vec()).unwrap()
    }

    fn ctx_m2(data: &[f64], column: Vec<i8>, pi: Vec<u32>, k: usize) -> RmmContext {
        let signs = SignAssignment::from_columns(data.len(), &[column]).unwrap();
        RmmContext::new(
            ds(data),
            signs,
            TieBreaker::from_permutation(pi).unwrap(),
            ConfidenceSpec::new(1, 2).unwrap(),
            k,
        )
        .unwrap()
    }

    #[test]
    fn alternative_sample_examples() {
        let data = [1.0, 3.0];
        assert_eq!(alternative_sample(&data, &[1, 1], 17.5).unwrap().values(), &data);
        assert_eq!(alternative_sample(&data, &[-1, -1], 0.0).unwrap().values(), &[-1.0, -3.0]);
        let got = alternative_sample(&data, &[-1, -1], 2.0).unwrap();
        let oracle: Vec<f64> = data.iter().map(|x| 2.0 * 2.0 - x).collect();
        assert_eq!(got.values(), oracle.as_slice());
        assert!(alternative_sample(&data, &[1], 0.0).is_err());
        assert!(alternative_sample(&data, &[1, 0], 0.0).is_err());
    }

    #[test]
    fn reference_stat_examples() {
        assert_eq!(reference_stat(&[1.0, 3.0], 0.0, 1).unwrap(), 2.0);
        assert_eq!(reference_stat(&[1.0, 3.0], 2.0, 1).unwrap(), 0.0);
        assert_eq!(reference_stat(&[0.0, 0.0, 0.0, 9.0, 1.0, 1.0], 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn rank_far_below_data_is_m() {
        let mut rng = derive_stream(1, &[]);
        let ctx = build_context(ds(&[0.5, 1.5, 2.0, 3.0]), ConfidenceSpec::new(1, 6).unwrap(), 2, &mut rng).unwrap();
        // S_0 has slope -1, every alternative a slope >= -1: far left S_0 wins
        // unless a column is all +1; rule those out by construction below.
        let signs = SignAssignment::from_columns(4, &vec![vec![-1, -1, -1, -1]; 5]).unwrap();
        let ctx = RmmContext::new(ctx.data().clone(), signs, ctx.tie_breaker().clone(), ctx.conf(), 2).unwrap();
        assert_eq!(rank(&ctx, -1e6), 1);
        assert_eq!(rank(&ctx, 1e6), 6);
    }

    #[test]
    fn rank_m2_strict() {
        // S_0 = 2 - theta, S_1 = theta - 2; at theta = 3, S_0 < S_1
        let ctx = ctx_m2(&[1.0, 3.0], vec![-1, -1], vec![0, 1], 1);
        assert_eq!(rank(&ctx, 3.0), 2);
        assert_eq!(rank(&ctx, 1.0), 1);
        assert_eq!(rmm_test(&ctx, 1.0), TestOutcome::Accept);
        assert_eq!(rmm_test(&ctx, 3.0), TestOutcome::Reject);
    }

    #[test]
    fn rank_pure_ties_follow_permutation() {
        // all-zero data: every S_j(0) = 0, rank = 1 + #{j : pi(0) < pi(j)}
        let data = ds(&[0.0, 0.0, 0.0]);
        let mut perms = Vec::new();
        for a in 0..3u32 {
            for b in 0..3u32 {
                for c in 0..3u32 {
                    if a != b && b != c && a != c {
                        perms.push(vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(perms.len(), 6);
        let signs = SignAssignment::from_columns(3, &[vec![1, -1, 1], vec![-1, -1, 1]]).unwrap();
        let mut histogram = [0usize; 4];
        for pi in perms {
            let expected = 1 + pi[1..].iter().filter(|&&p| pi[0] < p).count();
            let ctx = RmmContext::new(
                data.clone(),
                signs.clone(),
                TieBreaker::from_permutation(pi).unwrap(),
                ConfidenceSpec::new(1, 3).unwrap(),
                1,
            )
            .unwrap();
            let got = rank(&ctx, 0.0);
            assert_eq!(got, expected);
            histogram[got] += 1;
        }
        // each rank occurs for exactly 2 of the 6 permutations
        assert_eq!(&histogram[1..], &[2, 2, 2]);
    }

    #[test]
    fn r_equals_m_always_rejects() {
        let mut rng = derive_stream(3, &[]);
        let ctx = build_context(ds(&[1.0, 2.0, 5.0]), ConfidenceSpec::new(4, 4).unwrap(), 1, &mut rng).unwrap();
        for theta in [-100.0, 0.0, 2.0, 100.0] {
            assert_eq!(rmm_test(&ctx, theta), TestOutcome::Reject);
        }
        assert!(rmm_ucb(&ctx).is_err());
    }

    #[test]
    fn ucb_two_point_examples() {
        let ctx = ctx_m2(&[1.0, 3.0], vec![-1, -1], vec![0, 1], 1);
        assert_eq!(rmm_ucb(&ctx).unwrap(), ExtendedReal::Finite(2.0));
        let ctx = ctx_m2(&[1.0, 3.0], vec![1, -1], vec![1, 0], 1);
        assert_eq!(rmm_ucb(&ctx).unwrap(), ExtendedReal::Finite(3.0));
    }

    #[test]
    fn ucb_all_plus_column_depends_on_permutation() {
        // D_1 == D_0: the test accepts everywhere iff S_1 loses ties (pi(1) < pi(0))
        let lose = ctx_m2(&[0.3, -1.2, 4.0], vec![1, 1, 1], vec![1, 0], 1);
        assert_eq!(rmm_ucb(&lose).unwrap(), ExtendedReal::PosInf);
        assert_eq!(rank(&lose, 1e9), 1);
        let win = ctx_m2(&[0.3, -1.2, 4.0], vec![1, 1, 1], vec![0, 1], 1);
        assert_eq!(rmm_ucb(&win).unwrap(), ExtendedReal::NegInf);
        assert_eq!(rank(&win, -1e9), 2);
    }

    #[test]
    fn oracle_examples() {
        let ctx = ctx_m2(&[1.0, 3.0], vec![-1, -1], vec![0, 1], 1);
        let got = rmm_ucb_oracle(&ctx, -10.0, 10.0, 100_000).unwrap().finite().unwrap();
        assert!((got - 2.0).abs() <= 20.0 / 99_999.0);
        // window entirely above U: nothing accepted
        assert_eq!(rmm_ucb_oracle(&ctx, 5.0, 6.0, 10).unwrap(), ExtendedReal::NegInf);
        // window entirely below U: accepted at the top
        assert_eq!(rmm_ucb_oracle(&ctx, -5.0, 1.0, 10).unwrap(), ExtendedReal::PosInf);
        assert!(rmm_ucb_oracle(&ctx, 1.0, 1.0, 10).is_err());
        assert!(rmm_ucb_oracle(&ctx, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn build_context_is_deterministic() {
        let data = ds(&[0.1, 0.7, -0.3, 2.2, 1.1]);
        let conf = ConfidenceSpec::new(1, 5).unwrap();
        let a = build_context(data.clone(), conf, 2, &mut derive_stream(9, &[4])).unwrap();
        let b = build_context(data.clone(), conf, 2, &mut derive_stream(9, &[4])).unwrap();
        assert_eq!(a.signs(), b.signs());
        assert_eq!(a.tie_breaker(), b.tie_breaker());
        let c = build_context(data, ConfidenceSpec::new(1, 2).unwrap(), 1, &mut derive_stream(9, &[4])).unwrap();
        assert_eq!(c.signs().columns(), 1);
    }

    #[test]
    fn permutation_is_fair_for_m2() {
        let mut rng = derive_stream(11, &[]);
        let trials = 10_000;
        let wins = (0..trials)
            .filter(|_| {
                let t = TieBreaker::random(2, &mut rng);
                t.priority(0) < t.priority(1)
            })
            .count();
        let se = (0.25 / trials as f64).sqrt();
        assert!((wins as f64 / trials as f64 - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn context_validation() {
        let signs = SignAssignment::from_columns(2, &[vec![1, 1]]).unwrap();
        let tie = TieBreaker::from_permutation(vec![0, 1]).unwrap();
        let conf = ConfidenceSpec::new(1, 2).unwrap();
        assert!(RmmContext::new(ds(&[1.0, 2.0]), signs.clone(), tie.clone(), conf, 3).is_err());
        assert!(RmmContext::new(ds(&[1.0, 2.0, 3.0]), signs.clone(), tie.clone(), conf, 1).is_err());
        assert!(RmmContext::new(ds(&[1.0, 2.0]), signs, tie, ConfidenceSpec::new(1, 3).unwrap(), 1).is_err());
        assert!(TieBreaker::from_permutation(vec![0, 0]).is_err());
        assert!(TieBreaker::from_permutation(vec![0, 2]).is_err());
        assert!(ConfidenceSpec::new(0, 2).is_err());
        assert!(ConfidenceSpec::new(3, 2).is_err());
    }

    #[test]
    fn packed_signs_roundtrip_across_word_boundary() {
        let n = 130;
        let col: Vec<i8> = (0..n).map(|i| if (i * 7) % 3 == 0 { 1 } else { -1 }).collect();
        let s = SignAssignment::from_columns(n, &[col.clone(), col.iter().map(|x| -x).collect()]).unwrap();
        assert_eq!(s.column(0), col);
        assert_eq!(s.sign(129, 1), -col[129]);
    }

    /// Direct MARS-style computation for k = 1: intersection of the original
    /// mean line with each resampled mean line, maximised under ≺_π.
    fn mars_direct(ctx: &RmmContext) -> f64 {
        let data = ctx.data().values();
        let n = data.len() as f64;
        let mean0 = data.iter().sum::<f64>() / n;
        let tie = ctx.tie_breaker();
        let mut best = (f64::NEG_INFINITY, 0u32);
        for c in 0..ctx.signs().columns() {
            let col = ctx.signs().column(c);
            let mean_ax = data.iter().zip(&col).map(|(x, &s)| s as f64 * x).sum::<f64>() / n;
            let mean_a = col.iter().map(|&s| s as f64).sum::<f64>() / n;
            let u = if col.iter().all(|&s| s == 1) {
                if tie.priority(0) > tie.priority(c + 1) { f64::INFINITY } else { f64::NEG_INFINITY }
            } else {
                (mean0 - mean_ax) / (1.0 - mean_a)
            };
            let cand = (u, tie.priority(c + 1));
            if cand.0 > best.0 || (cand.0 == best.0 && cand.1 > best.1) {
                best = cand;
            }
        }
        best.0
    }

    #[test]
    fn k1_matches_direct_mars() {
        let mut rng = derive_stream(21, &[]);
        for case in 0..300 {
            let n = 1 + case % 9;
            let m = 2 + case % 7;
            let data: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ctx = build_context(ds(&data), ConfidenceSpec::new(1, m).unwrap(), 1, &mut rng).unwrap();
            let direct = mars_direct(&ctx);
            let got = rmm_ucb(&ctx).unwrap().to_f64();
            if direct.is_finite() {
                assert!((got - direct).abs() <= 1e-12 * (1.0 + direct.abs()), "{got} vs {direct}");
            } else {
                assert_eq!(got, direct);
            }
        }
    }

    #[test]
    fn bound_separates_ranks_on_bandit_sized_contexts() {
        let mut rng = derive_stream(22, &[]);
        for case in 0..120 {
            let n = rng.random_range(10..=250);
            let k = rng.random_range(1..=((n as f64).sqrt() as usize));
            let m = rng.random_range(2..=400);
            let r = rng.random_range(1..m.min(6));
            // heavy tails: ratios of uniforms
            let data: Vec<f64> =
                (0..n).map(|_| rng.random_range(-1.0..1.0) / rng.random_range(0.01f64..1.0)).collect();
            let ctx = build_context(ds(&data), ConfidenceSpec::new(r, m).unwrap(), k, &mut rng).unwrap();
            let threshold = m - r;
            match rmm_ucb(&ctx).unwrap() {
                ExtendedReal::Finite(u) => {
                    let eps = 1e-9 * (1.0 + u.abs());
                    assert!(rank(&ctx, u - eps) <= threshold, "case {case}: accepted below {u}");
                    assert!(rank(&ctx, u + eps) > threshold, "case {case}: rejected above {u}");
                }
                ExtendedReal::PosInf => assert!(rank(&ctx, 1e12) <= threshold, "case {case}"),
                ExtendedReal::NegInf => assert!(rank(&ctx, -1e12) > threshold, "case {case}"),
            }
        }
    }

    fn small_context() -> impl Strategy<Value = RmmContext> {
        (1usize..10, 2usize..7, any::<u64>()).prop_flat_map(|(n, m, seed)| {
            (1..=n.min(3), 1..m, prop::collection::vec(-5.0f64..5.0, n)).prop_map(move |(k, r, data)| {
                let mut rng = derive_stream(seed, &[]);
                build_context(Dataset::new(data).unwrap(), ConfidenceSpec::new(r, m).unwrap(), k, &mut rng).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn acceptance_region_is_a_half_line(ctx in small_context()) {
            let (lo, hi) = default_oracle_bounds(ctx.data());
            let mut seen_reject = false;
            for i in 0..2000 {
                let theta = grid_point(lo, hi, 2000, i);
                match rmm_test(&ctx, theta) {
                    TestOutcome::Reject => seen_reject = true,
                    TestOutcome::Accept => prop_assert!(!seen_reject, "accept after reject at {}", theta),
                }
            }
        }

        #[test]
        fn ucb_separates_accept_and_reject(ctx in small_context()) {
            let u = rmm_ucb(&ctx).unwrap();
            let threshold = ctx.conf().m() - ctx.conf().r();
            if let Some(u) = u.finite() {
                let eps = 1e-7 * (1.0 + u.abs());
                prop_assert!(rank(&ctx, u - eps) <= threshold);
                prop_assert!(rank(&ctx, u + eps) > threshold);
            }
        }

        #[test]
        fn ucb_is_translation_equivariant(ctx in small_context(), shift in -10.0f64..10.0) {
            let moved = Dataset::new(ctx.data().iter().map(|x| x + shift).collect()).unwrap();
            let moved = RmmContext::new(moved, ctx.signs().clone(), ctx.tie_breaker().clone(), ctx.conf(), ctx.k()).unwrap();
            let a = rmm_ucb(&ctx).unwrap();
            let b = rmm_ucb(&moved).unwrap();
            match (a.finite(), b.finite()) {
                (Some(x), Some(y)) => prop_assert!((x + shift - y).abs() <= 1e-9 * (1.0 + x.abs() + shift.abs())),
                _ => prop_assert_eq!(a, b),
            }
        }
    }
}
