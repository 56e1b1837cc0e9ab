use serde::{Deserialize, Serialize};

use crate::error::{MedianError, Result};
use crate::scalar::Scalar;

/// Search interval `[lo, hi]` split into equal-width bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRange<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> BinRange<T> {
    /// Requires finite `lo < hi`.
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(MedianError::InvalidParameter(format!(
                "bin range needs finite lo < hi, got [{lo}, {hi}]"
            )))
        }
    }

    /// `[mu - sigma, mu + sigma]` rounded to `T`, if that is a proper interval.
    pub fn around(mu: f64, sigma: f64) -> Option<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return None;
        }
        let lo = T::from_f64_nearest(mu - sigma);
        let hi = T::from_f64_nearest(mu + sigma);
        Self::new(lo, hi).ok()
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    /// Lower edge of bin `i` of `bins`; `edge(bins, bins) == hi`.
    pub fn edge(&self, i: usize, bins: usize) -> T {
        if i == 0 {
            return self.lo;
        }
        if i >= bins {
            return self.hi;
        }
        let frac = T::from_usize(i).unwrap() / T::from_usize(bins).unwrap();
        self.lo + self.width() * frac
    }

    /// Midpoint of bin `i`: `lo + (i + 1/2) * width / bins`.
    pub fn bin_midpoint(&self, i: usize, bins: usize) -> T {
        let half = T::from_f64_nearest(0.5);
        let w = self.width() / T::from_usize(bins).unwrap();
        self.lo + (T::from_usize(i).unwrap() + half) * w
    }

    /// Edges of bin `i`, if they still form a proper interval in `T`.
    pub fn sub_range(&self, i: usize, bins: usize) -> Option<Self> {
        Self::new(self.edge(i, bins), self.edge(i + 1, bins)).ok()
    }
}

/// Where a value falls relative to a [`BinRange`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinIndex {
    Left,
    In(usize),
    Right,
}

/// Maps `x` to a bin of `range` split into `bins` equal bins.
///
/// `x < lo` is `Left`, `x > hi` is `Right`, `x == hi` closes into the last
/// bin. Otherwise `floor((x - lo) * bins / (hi - lo))`, clamped.
///
/// Panics unless `2 <= bins <= BinParams::MAX_BINS`.
pub fn bin_index<T: Scalar>(x: T, range: &BinRange<T>, bins: usize) -> BinIndex {
    check_bins(bins).expect("valid bin count");
    Binner::new(*range, bins).index(x)
}

/// Precomputed mapping from values to count slots.
///
/// Slot 0 is left of the range, slots `1..=bins` are the bins and slot
/// `bins + 1` is right of the range. The mapping is non-decreasing in `x`,
/// which is what makes rank bookkeeping across levels exact.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Binner<T> {
    range: BinRange<T>,
    scale: T,
    last: T,
    bins: usize,
}

pub(crate) const MAX_BINS: usize = 1 << 24;

pub(crate) fn check_bins(bins: usize) -> Result<()> {
    if (2..=MAX_BINS).contains(&bins) {
        Ok(())
    } else {
        Err(MedianError::InvalidParameter(format!(
            "bin count must be in 2..={MAX_BINS}, got {bins}"
        )))
    }
}

impl<T: Scalar> Binner<T> {
    pub(crate) fn new(range: BinRange<T>, bins: usize) -> Self {
        debug_assert!(check_bins(bins).is_ok());
        let b = T::from_usize(bins).unwrap();
        let w = range.width();
        let scale = if w.is_finite() {
            b / w
        } else {
            // lo and hi more than T::MAX apart; offsets that overflow land in
            // the last bin, which keeps the mapping monotone
            let half = T::from_f64_nearest(0.5);
            (b * half) / (range.hi * half - range.lo * half)
        };
        let last = T::from_usize(bins - 1).unwrap();
        Self {
            range,
            scale,
            last,
            bins,
        }
    }

    pub(crate) fn range(&self) -> &BinRange<T> {
        &self.range
    }

    pub(crate) fn bins(&self) -> usize {
        self.bins
    }

    pub(crate) fn slots(&self) -> usize {
        self.bins + 2
    }

    #[inline(always)]
    pub(crate) fn slot(&self, x: T) -> usize {
        self.slot32(x) as usize
    }

    /// Slot as `u32`; bin counts are capped well below `u32::MAX`, and the
    /// narrow type lets the counting loop vectorize.
    #[inline(always)]
    fn slot32(&self, x: T) -> u32 {
        // selects rather than branches: which side of an edge random data
        // falls on is unpredictable
        let inside = ((x - self.range.lo) * self.scale).clamped_index(self.last) + 1;
        let s = if x > self.range.hi { self.bins as u32 + 1 } else { inside };
        if x < self.range.lo {
            0
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn index(&self, x: T) -> BinIndex {
        match self.slot(x) {
            0 => BinIndex::Left,
            s if s > self.bins => BinIndex::Right,
            s => BinIndex::In(s - 1),
        }
    }

    pub(crate) fn count_into(&self, values: &[T], slots: &mut [u64]) {
        debug_assert_eq!(slots.len(), self.slots());
        // slot computation vectorizes when kept apart from the increments
        let mut idx = [0u32; 256];
        if values.len() < 4 * idx.len() {
            for chunk in values.chunks(idx.len()) {
                for (o, &x) in idx.iter_mut().zip(chunk) {
                    *o = self.slot32(x);
                }
                for &i in &idx[..chunk.len()] {
                    slots[i as usize] += 1;
                }
            }
            return;
        }
        // runs of the same slot (the outer slots especially) serialize on a
        // single counter, so spread consecutive points over four copies
        let n = slots.len();
        let mut lanes = vec![0u64; 4 * n];
        let (l0, rest) = lanes.split_at_mut(n);
        let (l1, rest) = rest.split_at_mut(n);
        let (l2, l3) = rest.split_at_mut(n);
        for chunk in values.chunks(idx.len()) {
            for (o, &x) in idx.iter_mut().zip(chunk) {
                *o = self.slot32(x);
            }
            let mut quads = idx[..chunk.len()].chunks_exact(4);
            for q in &mut quads {
                l0[q[0] as usize] += 1;
                l1[q[1] as usize] += 1;
                l2[q[2] as usize] += 1;
                l3[q[3] as usize] += 1;
            }
            for &i in quads.remainder() {
                l0[i as usize] += 1;
            }
        }
        for (s, ((a, b), (c, d))) in slots.iter_mut().zip(l0.iter().zip(&*l1).zip(l2.iter().zip(&*l3))) {
            *s += a + b + c + d;
        }
    }

    pub(crate) fn count(&self, values: &[T]) -> Vec<u64> {
        let mut slots = vec![0u64; self.slots()];
        self.count_into(values, &mut slots);
        slots
    }
}

/// Per-bin counts of a dataset over `[mu - sigma, mu + sigma]` (or another
/// range), plus how many points fell left and right of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSketch<T> {
    pub(crate) mu: f64,
    pub(crate) sigma: f64,
    pub(crate) range: BinRange<T>,
    /// `bins + 2` slots: left, the bins, right.
    pub(crate) slots: Vec<u64>,
}

impl<T: Scalar> BinSketch<T> {
    pub(crate) fn from_slots(mu: f64, sigma: f64, range: BinRange<T>, slots: Vec<u64>) -> Self {
        Self {
            mu,
            sigma,
            range,
            slots,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn range(&self) -> &BinRange<T> {
        &self.range
    }

    pub fn num_bins(&self) -> usize {
        self.slots.len() - 2
    }

    pub fn counts(&self) -> &[u64] {
        &self.slots[1..self.slots.len() - 1]
    }

    pub fn n_left(&self) -> u64 {
        self.slots[0]
    }

    pub fn n_right(&self) -> u64 {
        self.slots[self.slots.len() - 1]
    }

    pub fn n_total(&self) -> u64 {
        self.slots.iter().sum()
    }

    pub(crate) fn binner(&self) -> Binner<T> {
        Binner::new(self.range, self.num_bins())
    }

    pub fn find_median_bin(&self, k: u64) -> MedianBin {
        find_median_bin(self.n_left(), self.counts(), k)
    }
}

/// One counting pass of `buf` over `[mu - sigma, mu + sigma]`.
///
/// Fails with [`MedianError::Degenerate`] when `sigma` is not positive (or too
/// small to separate the range edges in `T`); the caller should then treat the
/// data as constant.
pub fn build_sketch<T: Scalar>(buf: &[T], mu: f64, sigma: f64, bins: usize) -> Result<BinSketch<T>> {
    check_bins(bins)?;
    let range = BinRange::around(mu, sigma).ok_or(MedianError::Degenerate)?;
    let slots = Binner::new(range, bins).count(buf);
    Ok(BinSketch::from_slots(mu, sigma, range, slots))
}

/// Outcome of searching the counts for a rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianBin {
    /// Rank lies in bin `bin`, at 1-based position `rank_within` among the
    /// points of that bin.
    InBin { bin: usize, rank_within: u64 },
    OutsideLeft,
    OutsideRight,
}

/// Finds the minimal bin whose cumulative count (starting from `n_left`)
/// reaches rank `k`.
pub fn find_median_bin(n_left: u64, counts: &[u64], k: u64) -> MedianBin {
    if n_left >= k {
        return MedianBin::OutsideLeft;
    }
    let mut below = n_left;
    for (bin, &c) in counts.iter().enumerate() {
        if below + c >= k {
            return MedianBin::InBin {
                bin,
                rank_within: k - below,
            };
        }
        below += c;
    }
    MedianBin::OutsideRight
}

/// Slot holding a rank: `(slot, points in earlier slots)`. Searches the
/// whole slot vector, so left/right slots are reported as slot 0 / last.
pub(crate) fn locate_slot(slots: &[u64], k: usize) -> (usize, usize) {
    let k = k as u64;
    let mut below = 0u64;
    for (s, &c) in slots.iter().enumerate() {
        if below + c >= k {
            return (s, below as usize);
        }
        below += c;
    }
    unreachable!("rank {k} beyond total count {below}")
}
