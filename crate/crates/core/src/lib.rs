//! Median computation by repeated binning.
//!
//! * [`select`]: quickselect, the insertion-sort finisher and the sort baseline.
//! * [`bin_engine`]: exact [`binmedian`] and approximate [`binapprox`].
//! * [`updatable`]: a median that is cheap to refresh as points are added or removed.
//! * [`distributed`]: mergeable partial moments and bin counts for partitioned data.
//! * [`bench`]: data generators and the timing harness.
//!
//! Algorithms are generic over [`Scalar`] (`f32` and `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod bench;
pub mod bin_engine;
pub mod data;
pub mod distributed;
mod error;
pub mod scalar;
pub mod select;
pub mod updatable;

pub use bin_engine::{
    bin_index, binapprox, binapprox_with, binapprox_with_moments, binmedian, binmedian_with,
    binmedian_with_stats, build_sketch, find_median_bin, Approx, BinIndex, BinParams, BinRange,
    BinSketch, Extent, MedianBin, Moments, RefineStats,
};
pub use data::{check_finite, DataBuffer, MedianTarget};
pub use distributed::{
    distributed_binapprox, distributed_binmedian, merge_counts, merge_moments, partial_counts,
    partial_moments, PartialCounts,
};
pub use error::{MedianError, Result};
pub use scalar::{mean_of_pair, Scalar};
pub use select::{insertion_sort_median, median_select, partition3, select_kth, sort_median};
pub use updatable::UpdatableMedian;

pub type DataBuffer64 = DataBuffer<f64>;
pub type DataBuffer32 = DataBuffer<f32>;
pub type BinRange64 = BinRange<f64>;
pub type BinRange32 = BinRange<f32>;
pub type BinSketch64 = BinSketch<f64>;
pub type BinSketch32 = BinSketch<f32>;
pub type PartialCounts64 = PartialCounts<f64>;
pub type PartialCounts32 = PartialCounts<f32>;
pub type UpdatableMedian64 = UpdatableMedian<f64>;
pub type UpdatableMedian32 = UpdatableMedian<f32>;
