//! Median of partitioned data via mergeable partial results.
//!
//! Each partition reports its moments, then its bin counts over a range the
//! coordinator broadcasts. Counts are integers, so merged counts equal the
//! whole-data counts exactly. The topology is simulated in-process; a
//! [`CommStats`] tally records what would cross the wire.

use serde::{Deserialize, Serialize};

use crate::bin_engine::{
    approx_from_slots, check_bins, refine, BinParams, BinRange, Binner, Extent, LocalPool, Moments, RefineStats, Refined,
    Start, SurvivorPool,
};
use crate::data::MedianTarget;
use crate::error::{MedianError, Result};
use crate::scalar::Scalar;
use crate::select::{insertion_sort, pick_sorted};

/// Bin counts of one partition over a broadcast range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialCounts<T> {
    pub range: BinRange<T>,
    pub counts: Vec<u64>,
    pub n_left: u64,
    pub n_right: u64,
}

impl<T: Scalar> PartialCounts<T> {
    /// Merge identity for `range` and `bins`.
    pub fn zero(range: BinRange<T>, bins: usize) -> Self {
        Self {
            range,
            counts: vec![0; bins],
            n_left: 0,
            n_right: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.n_left + self.n_right + self.counts.iter().sum::<u64>()
    }

    fn from_slots(range: BinRange<T>, slots: &[u64]) -> Self {
        let b = slots.len() - 2;
        Self {
            range,
            counts: slots[1..=b].to_vec(),
            n_left: slots[0],
            n_right: slots[b + 1],
        }
    }

    fn to_slots(&self) -> Vec<u64> {
        let mut s = Vec::with_capacity(self.counts.len() + 2);
        s.push(self.n_left);
        s.extend_from_slice(&self.counts);
        s.push(self.n_right);
        s
    }
}

pub fn partial_moments<T: Scalar>(partition: &[T]) -> Moments {
    Moments::of(partition)
}

pub fn merge_moments(a: Moments, b: Moments) -> Moments {
    a.merge(b)
}

pub fn partial_counts<T: Scalar>(partition: &[T], range: BinRange<T>, bins: usize) -> Result<PartialCounts<T>> {
    check_bins(bins)?;
    let slots = Binner::new(range, bins).count(partition);
    Ok(PartialCounts::from_slots(range, &slots))
}

/// Field-wise sum. Both sides must share range and bin count.
pub fn merge_counts<T: Scalar>(a: &PartialCounts<T>, b: &PartialCounts<T>) -> Result<PartialCounts<T>> {
    if a.range != b.range || a.counts.len() != b.counts.len() {
        return Err(MedianError::RangeMismatch);
    }
    Ok(PartialCounts {
        range: a.range,
        counts: a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect(),
        n_left: a.n_left + b.n_left,
        n_right: a.n_right + b.n_right,
    })
}

/// Message tally for one distributed computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    /// Rounds in which every partition sends something to the coordinator.
    pub gather_rounds: usize,
    /// Rounds in which the coordinator sends a range to every partition.
    pub broadcast_rounds: usize,
    /// Largest single message from one partition, in 64-bit words.
    pub max_message_words: usize,
    /// Words sent by partitions in total.
    pub total_words: usize,
}

impl CommStats {
    fn gather(&mut self, sizes: impl IntoIterator<Item = usize>) {
        self.gather_rounds += 1;
        for w in sizes {
            self.max_message_words = self.max_message_words.max(w);
            self.total_words += w;
        }
    }
}

/// Moments plus extent: the first gather of both algorithms.
fn gather_summaries<T: Scalar>(parts: &[&[T]], comm: &mut CommStats) -> (Moments, Option<Extent<T>>) {
    let mut moments = Moments::ZERO;
    let mut extent = None;
    for p in parts {
        moments = merge_moments(moments, partial_moments(p));
        extent = Extent::merge_opt(extent, Extent::of(p));
    }
    // count, sum, sum_sq, min, max
    comm.gather(parts.iter().map(|_| 5));
    (moments, extent)
}

fn gather_counts<T: Scalar>(parts: &[&[T]], range: BinRange<T>, bins: usize, comm: &mut CommStats) -> PartialCounts<T> {
    comm.broadcast_rounds += 1;
    let mut merged = PartialCounts::zero(range, bins);
    for p in parts {
        let pc = partial_counts(p, range, bins).expect("bins validated");
        merged = merge_counts(&merged, &pc).expect("same broadcast range");
    }
    comm.gather(parts.iter().map(|_| bins + 2));
    merged
}

pub fn distributed_binapprox<T: Scalar, P: AsRef<[T]>>(partitions: &[P], bins: usize) -> Result<T> {
    distributed_binapprox_traced(partitions, bins).map(|(v, _)| v)
}

/// Two gathers in the usual case: moments, then counts over `[mu - sigma,
/// mu + sigma]`. Gives exactly what [`crate::binapprox_with_moments`] gives
/// on the concatenated data with the merged moments.
pub fn distributed_binapprox_traced<T: Scalar, P: AsRef<[T]>>(partitions: &[P], bins: usize) -> Result<(T, CommStats)> {
    check_bins(bins)?;
    let parts: Vec<&[T]> = partitions.iter().map(AsRef::as_ref).collect();
    let mut comm = CommStats::default();
    let (moments, extent) = gather_summaries(&parts, &mut comm);
    let target = MedianTarget::for_len(moments.count as usize)?;
    let extent = extent.expect("non-empty");
    if extent.min == extent.max {
        return Ok((extent.min, comm));
    }
    if let Some(range) = BinRange::around(moments.mean(), moments.std_dev()) {
        let merged = gather_counts(&parts, range, bins, &mut comm);
        if let Some(v) = approx_from_slots(&range, &merged.to_slots(), target) {
            return Ok((v, comm));
        }
    }
    let range = BinRange::new(extent.min, extent.max)?;
    let merged = gather_counts(&parts, range, bins, &mut comm);
    let v = approx_from_slots(&range, &merged.to_slots(), target).expect("extent covers all points");
    Ok((v, comm))
}

pub fn distributed_binmedian<T: Scalar, P: AsRef<[T]>>(partitions: &[P], params: BinParams) -> Result<T> {
    distributed_binmedian_traced(partitions, params).map(|(v, _, _)| v)
}

/// Exact median: the coordinator merges counts, picks the median bin and
/// broadcasts its edges; partitions narrow their local survivors. Once at
/// most `cutoff` survivors remain they are shipped to the coordinator.
pub fn distributed_binmedian_traced<T: Scalar, P: AsRef<[T]>>(
    partitions: &[P],
    params: BinParams,
) -> Result<(T, RefineStats, CommStats)> {
    let params = BinParams::new(params.bins, params.cutoff)?;
    let parts: Vec<&[T]> = partitions.iter().map(AsRef::as_ref).collect();
    let mut comm = CommStats::default();
    let mut stats = RefineStats::default();
    let (moments, extent) = gather_summaries(&parts, &mut comm);
    let n = moments.count as usize;
    let target = MedianTarget::for_len(n)?;
    if n <= params.cutoff {
        let mut all: Vec<T> = parts.concat();
        comm.gather(parts.iter().map(|p| p.len()));
        insertion_sort(&mut all);
        return Ok((pick_sorted(&all, target), stats, comm));
    }
    let extent = extent.expect("non-empty");
    if extent.min == extent.max {
        return Ok((extent.min, stats, comm));
    }
    let start = match BinRange::around(moments.mean(), moments.std_dev()) {
        Some(r) => Start::Range(r),
        None => {
            stats.extent_rebins += 1;
            Start::Range(BinRange::new(extent.min, extent.max)?)
        }
    };
    let mut pool = PartitionedPool {
        parts: parts.iter().map(|p| LocalPool::borrowed(p)).collect(),
        comm: &mut comm,
    };
    let value = match refine(&mut pool, target.ranks(), start, params, &mut stats) {
        Refined::Value(v) => v,
        Refined::Outside => unreachable!("no cached level"),
    };
    Ok((value, stats, comm))
}

struct PartitionedPool<'a, 'c, T> {
    parts: Vec<LocalPool<'a, T>>,
    comm: &'c mut CommStats,
}

impl<T: Scalar> SurvivorPool<T> for PartitionedPool<'_, '_, T> {
    fn len(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    fn count(&mut self, binner: &Binner<T>) -> Vec<u64> {
        self.comm.broadcast_rounds += 1;
        let mut merged = PartialCounts::zero(*binner.range(), binner.bins());
        for p in &mut self.parts {
            let pc = PartialCounts::from_slots(*binner.range(), &p.count(binner));
            merged = merge_counts(&merged, &pc).expect("same broadcast range");
        }
        self.comm.gather(self.parts.iter().map(|_| binner.slots()));
        merged.to_slots()
    }

    fn extent(&mut self) -> Option<Extent<T>> {
        let e = self.parts.iter_mut().fold(None, |acc, p| Extent::merge_opt(acc, p.extent()));
        self.comm.gather(self.parts.iter().map(|_| 2));
        e
    }

    fn retain_slot(&mut self, binner: &Binner<T>, slot: usize) {
        // the coordinator broadcasts the chosen bin; partitions narrow locally
        self.comm.broadcast_rounds += 1;
        for p in &mut self.parts {
            p.retain_slot(binner, slot);
        }
    }

    fn gather_slot(&mut self, binner: &Binner<T>, slot: usize) -> Vec<T> {
        self.comm.broadcast_rounds += 1;
        let chunks: Vec<Vec<T>> = self.parts.iter_mut().map(|p| p.gather_slot(binner, slot)).collect();
        self.comm.gather(chunks.iter().map(Vec::len));
        chunks.concat()
    }

    fn gather_pair(&mut self, binner: &Binner<T>, a: usize, b: usize) -> (Vec<T>, Vec<T>) {
        self.comm.broadcast_rounds += 1;
        let chunks: Vec<(Vec<T>, Vec<T>)> = self.parts.iter_mut().map(|p| p.gather_pair(binner, a, b)).collect();
        self.comm.gather(chunks.iter().map(|(l, r)| l.len() + r.len()));
        chunks.into_iter().fold((Vec::new(), Vec::new()), |(mut l, mut r), (cl, cr)| {
            l.extend(cl);
            r.extend(cr);
            (l, r)
        })
    }

    fn gather_all(&mut self) -> Vec<T> {
        let chunks: Vec<Vec<T>> = self.parts.iter_mut().map(|p| p.gather_all()).collect();
        self.comm.gather(chunks.iter().map(Vec::len));
        chunks.concat()
    }
}
