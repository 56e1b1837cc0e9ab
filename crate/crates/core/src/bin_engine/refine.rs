//! Repeated binning: the level loop shared by single-machine, updatable and
//! distributed median computation.

use crate::bin_engine::moments::Extent;
use crate::bin_engine::sketch::{check_bins, locate_slot, BinRange, Binner, MAX_BINS};
use crate::scalar::{mean_of_pair, Scalar};
use crate::select::{insertion_sort, select_kth};

/// Bin count and insertion-sort cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinParams {
    pub bins: usize,
    pub cutoff: usize,
}

impl BinParams {
    pub const DEFAULT_BINS: usize = 1000;
    pub const DEFAULT_CUTOFF: usize = 20;
    pub const MAX_BINS: usize = MAX_BINS;

    pub fn new(bins: usize, cutoff: usize) -> crate::Result<Self> {
        check_bins(bins)?;
        if cutoff < 1 {
            return Err(crate::MedianError::InvalidParameter(
                "cutoff must be at least 1".into(),
            ));
        }
        Ok(Self { bins, cutoff })
    }
}

impl Default for BinParams {
    fn default() -> Self {
        Self {
            bins: Self::DEFAULT_BINS,
            cutoff: Self::DEFAULT_CUTOFF,
        }
    }
}

/// Telemetry from one exact median computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineStats {
    /// Binning levels, including a level served from cached counts.
    pub iterations: usize,
    /// Full passes over the original data (moments, counting, collection).
    pub data_passes: usize,
    /// Surviving point count after each level.
    pub survivors: Vec<usize>,
    /// Levels that re-binned across the survivors' min/max.
    pub extent_rebins: usize,
}

/// Candidate points still in play. Implementations hold them in one buffer
/// or spread over partitions.
pub(crate) trait SurvivorPool<T: Scalar> {
    fn len(&self) -> usize;
    /// Slot counts (left, bins, right) of the survivors.
    fn count(&mut self, binner: &Binner<T>) -> Vec<u64>;
    fn extent(&mut self) -> Option<Extent<T>>;
    /// Keep only survivors mapped to `slot`.
    fn retain_slot(&mut self, binner: &Binner<T>, slot: usize);
    /// Survivors mapped to `slot`, leaving the pool unchanged.
    fn gather_slot(&mut self, binner: &Binner<T>, slot: usize) -> Vec<T>;
    /// Survivors of two different slots.
    fn gather_pair(&mut self, binner: &Binner<T>, a: usize, b: usize) -> (Vec<T>, Vec<T>) {
        (self.gather_slot(binner, a), self.gather_slot(binner, b))
    }
    fn gather_all(&mut self) -> Vec<T>;
}

/// How to start the level loop.
pub(crate) enum Start<T> {
    /// Bin over this range first.
    Range(BinRange<T>),
    /// Counts over this range are already known; if the ranks fall outside
    /// them, stop and report [`Refined::Outside`].
    Cached(BinRange<T>, Vec<u64>),
}

pub(crate) enum Refined<T> {
    Value(T),
    Outside,
}

/// Resolves the mean of the values at 1-based ranks `lo <= hi` (`hi <= lo + 1`)
/// among the pool's points.
pub(crate) fn refine<T: Scalar, P: SurvivorPool<T>>(
    pool: &mut P,
    (mut k_lo, mut k_hi): (usize, usize),
    start: Start<T>,
    params: BinParams,
    stats: &mut RefineStats,
) -> Refined<T> {
    debug_assert!(k_lo >= 1 && k_hi <= pool.len() && k_hi - k_lo <= 1);
    let bins = params.bins;
    let (mut next, mut cached) = match start {
        Start::Range(r) => (Some(r), None),
        Start::Cached(r, slots) => (Some(r), Some(slots)),
    };
    loop {
        let n = pool.len();
        if n <= params.cutoff {
            let mut rest = pool.gather_all();
            insertion_sort(&mut rest);
            return Refined::Value(mean_of_pair(rest[k_lo - 1], rest[k_hi - 1]));
        }
        let range = match next.take() {
            Some(r) => r,
            None => {
                let e = pool.extent().expect("non-empty pool");
                if e.min == e.max {
                    return Refined::Value(e.min);
                }
                stats.extent_rebins += 1;
                BinRange::new(e.min, e.max).expect("finite min < max")
            }
        };
        let binner = Binner::new(range, bins);
        let from_cache = cached.is_some();
        let slots = cached.take().unwrap_or_else(|| pool.count(&binner));
        stats.iterations += 1;

        let (s_lo, below_lo) = locate_slot(&slots, k_lo);
        let (s_hi, below_hi) = locate_slot(&slots, k_hi);
        let inside = |s: usize| s >= 1 && s <= bins;
        if !inside(s_lo) || !inside(s_hi) {
            if from_cache {
                return Refined::Outside;
            }
            // rounding can push ranks just outside the bins; the extent
            // always contains every survivor
            stats.survivors.push(n);
            continue;
        }
        if s_lo != s_hi {
            let (mut left, mut right) = pool.gather_pair(&binner, s_lo, s_hi);
            let a = select_kth(&mut left, k_lo - below_lo).expect("rank within bin");
            let b = select_kth(&mut right, k_hi - below_hi).expect("rank within bin");
            stats.survivors.push(left.len() + right.len());
            return Refined::Value(mean_of_pair(a, b));
        }
        pool.retain_slot(&binner, s_lo);
        k_lo -= below_lo;
        k_hi -= below_lo;
        let remaining = pool.len();
        stats.survivors.push(remaining);
        // all survivors in one bin: re-bin across their min/max next, which
        // puts min and max in different bins and guarantees progress
        next = if remaining == n {
            None
        } else {
            binner.range().sub_range(s_lo - 1, bins)
        };
    }
}

/// Survivors held in a single buffer; borrows the input until the first
/// narrowing.
pub(crate) struct LocalPool<'a, T> {
    src: Src<'a, T>,
    /// Passes made over the borrowed input.
    pub(crate) source_passes: usize,
}

enum Src<'a, T> {
    Borrowed(&'a [T]),
    Owned(Vec<T>),
}

impl<'a, T: Scalar> LocalPool<'a, T> {
    pub(crate) fn borrowed(data: &'a [T]) -> Self {
        Self {
            src: Src::Borrowed(data),
            source_passes: 0,
        }
    }

    fn as_slice(&mut self) -> &[T] {
        match &self.src {
            Src::Borrowed(s) => {
                self.source_passes += 1;
                s
            }
            Src::Owned(v) => v,
        }
    }
}

impl<T: Scalar> SurvivorPool<T> for LocalPool<'_, T> {
    fn len(&self) -> usize {
        match &self.src {
            Src::Borrowed(s) => s.len(),
            Src::Owned(v) => v.len(),
        }
    }

    fn count(&mut self, binner: &Binner<T>) -> Vec<u64> {
        binner.count(self.as_slice())
    }

    fn extent(&mut self) -> Option<Extent<T>> {
        Extent::of(self.as_slice())
    }

    fn retain_slot(&mut self, binner: &Binner<T>, slot: usize) {
        match &mut self.src {
            Src::Borrowed(s) => {
                let kept = s.iter().copied().filter(|&x| binner.slot(x) == slot).collect();
                self.source_passes += 1;
                self.src = Src::Owned(kept);
            }
            Src::Owned(v) => v.retain(|&x| binner.slot(x) == slot),
        }
    }

    fn gather_slot(&mut self, binner: &Binner<T>, slot: usize) -> Vec<T> {
        self.as_slice()
            .iter()
            .copied()
            .filter(|&x| binner.slot(x) == slot)
            .collect()
    }

    fn gather_pair(&mut self, binner: &Binner<T>, a: usize, b: usize) -> (Vec<T>, Vec<T>) {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &x in self.as_slice() {
            let s = binner.slot(x);
            if s == a {
                left.push(x);
            } else if s == b {
                right.push(x);
            }
        }
        (left, right)
    }

    fn gather_all(&mut self) -> Vec<T> {
        match &mut self.src {
            Src::Borrowed(s) => {
                self.source_passes += 1;
                s.to_vec()
            }
            Src::Owned(v) => std::mem::take(v),
        }
    }
}
