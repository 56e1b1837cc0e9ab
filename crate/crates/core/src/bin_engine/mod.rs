//! Exact and approximate medians by repeated binning.
//!
//! The mean and standard deviation of the data bound the median: it always
//! lies in `[mu - sigma, mu + sigma]`. [`binmedian`] splits that interval
//! into `bins` equal bins, counts points per bin, locates the bin holding the
//! median rank and repeats on the points of that bin until at most `cutoff`
//! remain. [`binapprox`] stops after the first level and returns the median
//! bin's midpoint, which is within `sigma / bins` of the true median.

mod moments;
mod refine;
mod sketch;

pub use moments::{Extent, Moments};
pub use refine::{BinParams, RefineStats};
pub use sketch::{bin_index, build_sketch, find_median_bin, BinIndex, BinRange, BinSketch, MedianBin};

pub(crate) use moments::summarize;
pub(crate) use refine::{refine, LocalPool, Refined, Start, SurvivorPool};
pub(crate) use sketch::{check_bins, locate_slot, Binner};

use crate::data::MedianTarget;
use crate::error::{MedianError, Result};
use crate::scalar::{mean_of_pair, Scalar};
use crate::select::{insertion_sort, pick_sorted};

/// Exact median with the default 1000 bins and cutoff 20.
pub fn binmedian<T: Scalar>(buf: &[T]) -> Result<T> {
    binmedian_with(buf, BinParams::default())
}

pub fn binmedian_with<T: Scalar>(buf: &[T], params: BinParams) -> Result<T> {
    binmedian_with_stats(buf, params).map(|(v, _)| v)
}

/// Exact median plus per-level telemetry. The input is never reordered;
/// surviving points are copied into scratch space at each level.
pub fn binmedian_with_stats<T: Scalar>(buf: &[T], params: BinParams) -> Result<(T, RefineStats)> {
    let params = BinParams::new(params.bins, params.cutoff)?;
    let target = MedianTarget::for_len(buf.len())?;
    let mut stats = RefineStats::default();
    if buf.len() <= params.cutoff {
        let mut scratch = buf.to_vec();
        insertion_sort(&mut scratch);
        stats.data_passes = 1;
        return Ok((pick_sorted(&scratch, target), stats));
    }
    let (moments, extent) = summarize(buf);
    stats.data_passes = 1;
    let extent = extent.expect("non-empty");
    if extent.min == extent.max {
        return Ok((extent.min, stats));
    }
    let start = match BinRange::around(moments.mean(), moments.std_dev()) {
        Some(r) => Start::Range(r),
        // sigma lost to cancellation or rounding: bin across the data instead
        None => {
            stats.extent_rebins += 1;
            Start::Range(BinRange::new(extent.min, extent.max).expect("finite min < max"))
        }
    };
    let mut pool = LocalPool::borrowed(buf);
    let value = match refine(&mut pool, target.ranks(), start, params, &mut stats) {
        Refined::Value(v) => v,
        Refined::Outside => unreachable!("no cached level"),
    };
    stats.data_passes += pool.source_passes;
    Ok((value, stats))
}

/// Approximate median and its guaranteed error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approx<T> {
    pub value: T,
    /// `|value - median| <= bound`; `sigma / bins` in the usual case.
    pub bound: f64,
}

/// Approximate median with the default 1000 bins.
pub fn binapprox<T: Scalar>(buf: &[T]) -> Result<T> {
    binapprox_with(buf, BinParams::DEFAULT_BINS).map(|a| a.value)
}

/// Midpoint of the median's bin over `[mu - sigma, mu + sigma]`. Reads the
/// data twice (moments, then counts) and never modifies it.
pub fn binapprox_with<T: Scalar>(buf: &[T], bins: usize) -> Result<Approx<T>> {
    if buf.is_empty() {
        return Err(MedianError::Empty);
    }
    binapprox_with_moments(buf, &Moments::of(buf), bins)
}

/// [`binapprox_with`] using moments computed elsewhere (for example merged
/// from partitions). `moments` must describe `buf`.
pub fn binapprox_with_moments<T: Scalar>(buf: &[T], moments: &Moments, bins: usize) -> Result<Approx<T>> {
    let target = MedianTarget::for_len(buf.len())?;
    check_bins(bins)?;
    if moments.count != buf.len() as u64 {
        return Err(MedianError::InvalidParameter(format!(
            "moments describe {} values, buffer has {}",
            moments.count,
            buf.len()
        )));
    }
    let sigma = moments.std_dev();
    if let Some(range) = BinRange::around(moments.mean(), sigma) {
        let slots = Binner::new(range, bins).count(buf);
        if let Some(value) = approx_from_slots(&range, &slots, target) {
            return Ok(Approx {
                value,
                bound: sigma / bins as f64,
            });
        }
    }
    approx_over_extent(buf, target, bins)
}

/// Midpoint answer from slot counts, or `None` if a median rank is outside
/// the bins.
pub(crate) fn approx_from_slots<T: Scalar>(range: &BinRange<T>, slots: &[u64], target: MedianTarget) -> Option<T> {
    let bins = slots.len() - 2;
    let (k_lo, k_hi) = target.ranks();
    let (s_lo, _) = locate_slot(slots, k_lo);
    let (s_hi, _) = locate_slot(slots, k_hi);
    let inside = |s: usize| s >= 1 && s <= bins;
    if !inside(s_lo) || !inside(s_hi) {
        return None;
    }
    let a = range.bin_midpoint(s_lo - 1, bins);
    if s_lo == s_hi {
        Some(a)
    } else {
        Some(mean_of_pair(a, range.bin_midpoint(s_hi - 1, bins)))
    }
}

/// Zero (or numerically unusable) sigma, or a median pushed outside the bins
/// by rounding: bin across the data's own min/max.
fn approx_over_extent<T: Scalar>(buf: &[T], target: MedianTarget, bins: usize) -> Result<Approx<T>> {
    let e = Extent::of(buf).ok_or(MedianError::Empty)?;
    if e.min == e.max {
        return Ok(Approx { value: e.min, bound: 0.0 });
    }
    let range = BinRange::new(e.min, e.max)?;
    let slots = Binner::new(range, bins).count(buf);
    let value = approx_from_slots(&range, &slots, target).expect("extent covers all points");
    Ok(Approx {
        value,
        bound: range.width().to_f64_lossless() / (2 * bins) as f64,
    })
}
