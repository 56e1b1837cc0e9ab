//! Exact selection: iterative quickselect with a median-of-three pivot and a
//! three-way partition, the insertion-sort finisher for tiny inputs, and the
//! full-sort baseline.

use std::cmp::Ordering;

use crate::data::MedianTarget;
use crate::error::{MedianError, Result};
use crate::scalar::{mean_of_pair, Scalar};

/// Active ranges at or below this length are finished by insertion sort.
const SMALL_RANGE: usize = 12;

/// Comparison telemetry for one selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelectStats {
    pub comparisons: u64,
    pub partitions: u64,
}

/// Returns the `k`-th smallest element (1-based), reordering `buf`.
///
/// On return `buf[k - 1]` holds the result, everything before it is `<=` and
/// everything after it is `>=`.
pub fn select_kth<T: Scalar>(buf: &mut [T], k: usize) -> Result<T> {
    check_rank(buf.len(), k)?;
    Ok(select_impl::<T, false>(buf, k - 1, &mut SelectStats::default()))
}

/// [`select_kth`] with comparison counting.
pub fn select_kth_with_stats<T: Scalar>(buf: &mut [T], k: usize) -> Result<(T, SelectStats)> {
    check_rank(buf.len(), k)?;
    let mut stats = SelectStats::default();
    let v = select_impl::<T, true>(buf, k - 1, &mut stats);
    Ok((v, stats))
}

/// Median by quickselect. Even lengths average the two middle ranks, the
/// right one found by a minimum scan over the region right of the left rank.
pub fn median_select<T: Scalar>(buf: &mut [T]) -> Result<T> {
    match MedianTarget::for_len(buf.len())? {
        MedianTarget::Single(k) => select_kth(buf, k),
        MedianTarget::Pair(lo, _) => {
            let left = select_kth(buf, lo)?;
            let right = min_of(&buf[lo..]);
            Ok(mean_of_pair(left, right))
        }
    }
}

/// Three-way partition of `buf` around `pivot`: `[< pivot | == pivot | > pivot]`.
///
/// Returns the sizes of the three blocks. `pivot` is expected to be an element
/// of `buf`; if it is not, the middle block is simply empty.
pub fn partition3<T: Scalar>(buf: &mut [T], pivot: T) -> (usize, usize, usize) {
    let (lt, gt) = partition3_impl::<T, false>(buf, pivot, &mut 0);
    (lt, gt - lt, buf.len() - gt)
}

/// Sorts `buf` by insertion sort and returns the value at `target`.
pub fn insertion_sort_median<T: Scalar>(buf: &mut [T], target: MedianTarget) -> Result<T> {
    if buf.is_empty() {
        return Err(MedianError::Empty);
    }
    if !target.is_valid_for(buf.len()) {
        let (_, hi) = target.ranks();
        return Err(MedianError::RankOutOfRange { k: hi, n: buf.len() });
    }
    insertion_sort(buf);
    Ok(pick_sorted(buf, target))
}

/// Median by a full comparison sort. Benchmark baseline and test oracle.
pub fn sort_median<T: Scalar>(buf: &mut [T]) -> Result<T> {
    let target = MedianTarget::for_len(buf.len())?;
    buf.sort_unstable_by(cmp_values);
    Ok(pick_sorted(buf, target))
}

pub(crate) fn pick_sorted<T: Scalar>(sorted: &[T], target: MedianTarget) -> T {
    match target {
        MedianTarget::Single(k) => sorted[k - 1],
        MedianTarget::Pair(lo, hi) => mean_of_pair(sorted[lo - 1], sorted[hi - 1]),
    }
}

pub(crate) fn insertion_sort<T: Scalar>(buf: &mut [T]) {
    for i in 1..buf.len() {
        let x = buf[i];
        let mut j = i;
        while j > 0 && buf[j - 1] > x {
            buf[j] = buf[j - 1];
            j -= 1;
        }
        buf[j] = x;
    }
}

#[inline]
fn cmp_values<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn check_rank(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(MedianError::Empty);
    }
    if k == 0 || k > n {
        return Err(MedianError::RankOutOfRange { k, n });
    }
    Ok(())
}

pub(crate) fn min_of<T: Scalar>(buf: &[T]) -> T {
    buf.iter().copied().fold(buf[0], T::min)
}

/// Index-0-based selection over the whole buffer; `idx < buf.len()`.
fn select_impl<T: Scalar, const COUNT: bool>(buf: &mut [T], idx: usize, stats: &mut SelectStats) -> T {
    let mut lo = 0;
    let mut hi = buf.len();
    loop {
        let len = hi - lo;
        if len <= SMALL_RANGE {
            let range = &mut buf[lo..hi];
            if COUNT {
                stats.comparisons += (len * len.saturating_sub(1) / 2) as u64;
            }
            insertion_sort(range);
            return buf[idx];
        }
        let pivot = median_of_three(buf[lo], buf[lo + len / 2], buf[hi - 1]);
        if COUNT {
            stats.comparisons += 3;
            stats.partitions += 1;
        }
        let mut cmps = 0;
        let (lt, gt) = partition3_impl::<T, COUNT>(&mut buf[lo..hi], pivot, &mut cmps);
        if COUNT {
            stats.comparisons += cmps;
        }
        let (lt, gt) = (lo + lt, lo + gt);
        if idx < lt {
            hi = lt;
        } else if idx >= gt {
            lo = gt;
        } else {
            return pivot;
        }
    }
}

#[inline]
fn median_of_three<T: Scalar>(a: T, b: T, c: T) -> T {
    if a < b {
        if b < c {
            b
        } else if a < c {
            c
        } else {
            a
        }
    } else if a < c {
        a
    } else if b < c {
        c
    } else {
        b
    }
}

/// Dutch-flag partition. Returns `(lt, gt)` with `[0, lt)` below the pivot,
/// `[lt, gt)` equal, `[gt, len)` above.
#[inline]
fn partition3_impl<T: Scalar, const COUNT: bool>(buf: &mut [T], pivot: T, cmps: &mut u64) -> (usize, usize) {
    let mut lt = 0;
    let mut i = 0;
    let mut gt = buf.len();
    while i < gt {
        let x = buf[i];
        if x < pivot {
            buf.swap(lt, i);
            lt += 1;
            i += 1;
            if COUNT {
                *cmps += 1;
            }
        } else if x > pivot {
            gt -= 1;
            buf.swap(i, gt);
            if COUNT {
                *cmps += 2;
            }
        } else {
            i += 1;
            if COUNT {
                *cmps += 2;
            }
        }
    }
    (lt, gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(v: &[f64]) -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    }

    #[test]
    fn select_hand_cases() {
        assert_eq!(select_kth(&mut [3.0, 1.0, 2.0], 2).unwrap(), 2.0);
        assert_eq!(select_kth(&mut [5.0, 5.0, 5.0, 5.0], 3).unwrap(), 5.0);
        assert_eq!(
            select_kth(&mut [1.0, 2.0], 3),
            Err(MedianError::RankOutOfRange { k: 3, n: 2 })
        );
        assert_eq!(
            select_kth(&mut [1.0], 0),
            Err(MedianError::RankOutOfRange { k: 0, n: 1 })
        );
        assert_eq!(select_kth::<f64>(&mut [], 1), Err(MedianError::Empty));
    }

    #[test]
    fn select_matches_sort_on_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
        let oracle = sorted(&data)[416];
        let mut buf = data.clone();
        assert_eq!(select_kth(&mut buf, 417).unwrap(), oracle);
        assert_eq!(sorted(&buf), sorted(&data));
        assert!(buf[..416].iter().all(|&x| x <= oracle));
        assert!(buf[417..].iter().all(|&x| x >= oracle));
    }

    #[test]
    fn median_select_cases() {
        assert_eq!(median_select(&mut [1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median_select(&mut [7.0]).unwrap(), 7.0);
        assert_eq!(median_select::<f64>(&mut []), Err(MedianError::Empty));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [10_000usize, 10_001] {
            let data: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let v: f64 = rng.gen();
                    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
                })
                .collect();
            let s = sorted(&data);
            let oracle = if n % 2 == 1 {
                s[n / 2]
            } else {
                mean_of_pair(s[n / 2 - 1], s[n / 2])
            };
            let got = median_select(&mut data.clone()).unwrap();
            assert_eq!(got.to_bits(), oracle.to_bits());
        }
    }

    #[test]
    fn partition3_cases() {
        let mut a = [2.0, 1.0, 2.0, 3.0];
        assert_eq!(partition3(&mut a, 2.0), (1, 2, 1));
        assert_eq!(a, [1.0, 2.0, 2.0, 3.0]);
        assert_eq!(partition3(&mut [9.0], 9.0), (0, 1, 0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut buf: Vec<f64> = (0..200).map(|_| rng.gen_range(0..20) as f64).collect();
        let pivot = buf[100];
        let lt = buf.iter().filter(|&&x| x < pivot).count();
        let eq = buf.iter().filter(|&&x| x == pivot).count();
        let gt = buf.iter().filter(|&&x| x > pivot).count();
        assert_eq!(partition3(&mut buf, pivot), (lt, eq, gt));
        assert!(buf[..lt].iter().all(|&x| x < pivot));
        assert!(buf[lt..lt + eq].iter().all(|&x| x == pivot));
        assert!(buf[lt + eq..].iter().all(|&x| x > pivot));
    }

    #[test]
    fn insertion_sort_median_cases() {
        assert_eq!(
            insertion_sort_median(&mut [4.0, 1.0, 3.0], MedianTarget::Single(2)).unwrap(),
            3.0
        );
        assert_eq!(
            insertion_sort_median(&mut [2.0, 1.0], MedianTarget::Pair(1, 2)).unwrap(),
            1.5
        );
        assert_eq!(
            insertion_sort_median::<f64>(&mut [], MedianTarget::Single(1)),
            Err(MedianError::Empty)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..19).map(|_| rng.gen()).collect();
        let mut buf = data.clone();
        assert_eq!(
            insertion_sort_median(&mut buf, MedianTarget::Single(10)).unwrap(),
            sorted(&data)[9]
        );
        assert_eq!(buf, sorted(&data));
    }

    #[test]
    fn sort_median_cases() {
        assert_eq!(sort_median(&mut [3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(sort_median(&mut [1.0, 2.0]).unwrap(), 1.5);
        assert_eq!(sort_median::<f64>(&mut []), Err(MedianError::Empty));

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let data: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let a = sort_median(&mut data.clone()).unwrap();
        let b = median_select(&mut data.clone()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn works_for_f32() {
        let mut v = [3.5f32, -1.0, 2.0, 8.0];
        assert_eq!(median_select(&mut v).unwrap(), 2.75);
    }

    #[test]
    fn comparisons_grow_linearly_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut per_elem = Vec::new();
        for n in [10_000usize, 100_000, 1_000_000] {
            let mut data: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let (_, stats) = select_kth_with_stats(&mut data, n / 2 + 1).unwrap();
            per_elem.push(stats.comparisons as f64 / n as f64);
        }
        // roughly constant per element; a quadratic blowup would be orders larger
        assert!(per_elem.iter().all(|&c| c < 12.0), "{per_elem:?}");
    }

    proptest! {
        #[test]
        fn select_agrees_with_sort(
            data in prop::collection::vec(-50i32..50, 1..400),
            pick in any::<prop::sample::Index>(),
        ) {
            let data: Vec<f64> = data.into_iter().map(|x| x as f64 * 0.5).collect();
            let k = pick.index(data.len()) + 1;
            let mut buf = data.clone();
            prop_assert_eq!(select_kth(&mut buf, k).unwrap(), sorted(&data)[k - 1]);
        }

        #[test]
        fn partition_postcondition(data in prop::collection::vec(-20i32..20, 1..300), pick in any::<prop::sample::Index>()) {
            let mut buf: Vec<f64> = data.into_iter().map(f64::from).collect();
            let pivot = buf[pick.index(buf.len())];
            let (lt, eq, gt) = partition3(&mut buf, pivot);
            prop_assert_eq!(lt + eq + gt, buf.len());
            prop_assert!(eq >= 1);
            prop_assert!(buf[..lt].iter().all(|&x| x < pivot));
            prop_assert!(buf[lt..lt + eq].iter().all(|&x| x == pivot));
            prop_assert!(buf[lt + eq..].iter().all(|&x| x > pivot));
        }
    }
}
