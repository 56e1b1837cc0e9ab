//! A median that stays cheap to refresh as points are added or removed.
//!
//! The structure keeps the bin counts of its last full build over the frozen
//! range `[mu0 - sigma0, mu0 + sigma0]`. New points only increment counts and
//! removed points decrement them. A query finds the median bin from the
//! counts; only when the median rank has left the frozen range does it
//! recompute moments and re-bin everything.

use std::collections::HashMap;

use crate::bin_engine::{
    approx_from_slots, refine, summarize, Approx, BinParams, BinRange, BinSketch, Binner, LocalPool,
    Moments, RefineStats, Refined, Start,
};
use crate::data::{check_finite, MedianTarget};
use crate::error::{MedianError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum State<T> {
    Binned(BinSketch<T>),
    /// Every retained point equals this value.
    Constant(T),
}

#[derive(Debug, Clone)]
pub struct UpdatableMedian<T> {
    data: Vec<T>,
    params: BinParams,
    state: State<T>,
    base_moments: Moments,
    /// Half the frozen bin width: `sigma0 / bins` for a moment-based range.
    base_half_width: f64,
    n0: usize,
    rebuild_count: usize,
    /// A constant base received a different value; rebuild at next query.
    stale: bool,
    last_query: RefineStats,
}

impl<T: Scalar> UpdatableMedian<T> {
    pub fn new(initial: &[T]) -> Result<Self> {
        Self::with_params(initial, BinParams::default())
    }

    pub fn with_params(initial: &[T], params: BinParams) -> Result<Self> {
        let params = BinParams::new(params.bins, params.cutoff)?;
        if initial.is_empty() {
            return Err(MedianError::Empty);
        }
        check_finite(initial)?;
        let mut um = Self {
            data: initial.to_vec(),
            params,
            state: State::Constant(initial[0]),
            base_moments: Moments::ZERO,
            base_half_width: 0.0,
            n0: 0,
            rebuild_count: 0,
            stale: false,
            last_query: RefineStats::default(),
        };
        um.rebuild();
        Ok(um)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Retained points in insertion order (minus removals).
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn params(&self) -> BinParams {
        self.params
    }

    /// Size at the last full build.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Full builds so far, including the initial one.
    pub fn rebuild_count(&self) -> usize {
        self.rebuild_count
    }

    pub fn base_moments(&self) -> &Moments {
        &self.base_moments
    }

    /// Cached counts; `None` while the data is constant.
    pub fn sketch(&self) -> Option<&BinSketch<T>> {
        match &self.state {
            State::Binned(s) => Some(s),
            State::Constant(_) => None,
        }
    }

    pub fn n_right(&self) -> u64 {
        self.sketch().map_or(0, |s| s.n_right())
    }

    /// Telemetry of the most recent exact query.
    pub fn last_query_stats(&self) -> &RefineStats {
        &self.last_query
    }

    /// Appends points and bins them against the frozen range.
    pub fn add(&mut self, points: &[T]) -> Result<()> {
        check_finite(points)?;
        match &mut self.state {
            State::Binned(sketch) => {
                let binner = sketch.binner();
                binner.count_into(points, &mut sketch.slots);
            }
            State::Constant(c) => {
                let c = *c;
                if points.iter().any(|&x| x != c) {
                    self.stale = true;
                }
            }
        }
        self.data.extend_from_slice(points);
        Ok(())
    }

    /// Removes one retained occurrence of each value in `points`.
    ///
    /// Fails without modifying anything if some value is not present often
    /// enough.
    pub fn remove(&mut self, points: &[T]) -> Result<()> {
        if points.is_empty() {
            return Ok(());
        }
        let mut wanted: HashMap<u64, usize> = HashMap::with_capacity(points.len());
        for &x in points {
            *wanted.entry(x.value_key()).or_default() += 1;
        }
        let mut doomed = vec![false; self.data.len()];
        let mut outstanding = points.len();
        for (i, &x) in self.data.iter().enumerate() {
            if let Some(need) = wanted.get_mut(&x.value_key()) {
                if *need > 0 {
                    *need -= 1;
                    doomed[i] = true;
                    outstanding -= 1;
                    if outstanding == 0 {
                        break;
                    }
                }
            }
        }
        if outstanding > 0 {
            let missing = points
                .iter()
                .find(|x| wanted.get(&x.value_key()).is_some_and(|&n| n > 0))
                .expect("some value unmatched");
            return Err(MedianError::NotPresent(missing.to_f64_lossless()));
        }

        if let State::Binned(sketch) = &mut self.state {
            let binner = sketch.binner();
            let mut dec = vec![0u64; binner.slots()];
            for (x, _) in self.data.iter().zip(&doomed).filter(|(_, &d)| d) {
                dec[binner.slot(*x)] += 1;
            }
            if dec.iter().zip(&sketch.slots).any(|(d, c)| d > c) {
                return Err(MedianError::CounterUnderflow);
            }
            for (c, d) in sketch.slots.iter_mut().zip(&dec) {
                *c -= d;
            }
        }
        let mut i = 0;
        self.data.retain(|_| {
            let keep = !doomed[i];
            i += 1;
            keep
        });
        Ok(())
    }

    /// Exact median of the retained points.
    pub fn query_exact(&mut self) -> Result<T> {
        let target = MedianTarget::for_len(self.data.len())?;
        if self.stale {
            self.rebuild();
        }
        for attempt in 0..2 {
            let (range, slots) = match &self.state {
                State::Constant(c) => {
                    self.last_query = RefineStats::default();
                    return Ok(*c);
                }
                State::Binned(s) => (*s.range(), s.slots.clone()),
            };
            let mut stats = RefineStats::default();
            let mut pool = LocalPool::borrowed(&self.data);
            let outcome = refine(
                &mut pool,
                target.ranks(),
                Start::Cached(range, slots),
                self.params,
                &mut stats,
            );
            stats.data_passes += pool.source_passes;
            self.last_query = stats;
            match outcome {
                Refined::Value(v) => return Ok(v),
                Refined::Outside => {
                    debug_assert_eq!(attempt, 0, "fresh build must contain the median");
                    self.rebuild();
                }
            }
        }
        unreachable!("a rebuilt sketch always contains the median ranks")
    }

    /// Midpoint of the median's bin over the frozen range, with an error
    /// bound of `sqrt(n / n0) * sigma0 / bins` (never less than
    /// `sigma0 / bins`, the half-width of a bin).
    pub fn query_approx(&mut self) -> Result<Approx<T>> {
        let target = MedianTarget::for_len(self.data.len())?;
        if self.stale {
            self.rebuild();
        }
        for _ in 0..2 {
            match &self.state {
                State::Constant(c) => return Ok(Approx { value: *c, bound: 0.0 }),
                State::Binned(s) => {
                    if let Some(value) = approx_from_slots(s.range(), &s.slots, target) {
                        return Ok(Approx {
                            value,
                            bound: self.current_bound(),
                        });
                    }
                }
            }
            self.rebuild();
        }
        unreachable!("a rebuilt sketch always contains the median ranks")
    }

    /// Error bound the approximate query would report now.
    pub fn current_bound(&self) -> f64 {
        let growth = (self.data.len().max(self.n0) as f64 / self.n0 as f64).sqrt();
        growth * self.base_half_width
    }

    /// Recomputes moments and re-bins all retained points.
    pub fn rebuild(&mut self) {
        self.rebuild_count += 1;
        self.stale = false;
        self.n0 = self.data.len();
        let (moments, extent) = summarize(&self.data);
        self.base_moments = moments;
        let Some(extent) = extent else {
            // nothing retained; keep the old bins so later adds still count
            return;
        };
        if extent.min == extent.max {
            self.state = State::Constant(extent.min);
            self.base_half_width = 0.0;
            return;
        }
        let bins = self.params.bins;
        let target = MedianTarget::for_len(self.data.len()).expect("non-empty");
        let (mu, sigma) = (moments.mean(), moments.std_dev());
        if let Some(range) = BinRange::around(mu, sigma) {
            let slots = Binner::new(range, bins).count(&self.data);
            if approx_from_slots(&range, &slots, target).is_some() {
                self.base_half_width = sigma / bins as f64;
                self.state = State::Binned(BinSketch::from_slots(mu, sigma, range, slots));
                return;
            }
        }
        // rounding defeated the moment-based range; bin across the data
        let range = BinRange::new(extent.min, extent.max).expect("finite min < max");
        let slots = Binner::new(range, bins).count(&self.data);
        self.base_half_width = range.width().to_f64_lossless() / (2 * bins) as f64;
        self.state = State::Binned(BinSketch::from_slots(mu, sigma, range, slots));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::sort_median;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(v: &[f64]) -> f64 {
        sort_median(&mut v.to_vec()).unwrap()
    }

    fn check_conservation(um: &UpdatableMedian<f64>) {
        if let Some(s) = um.sketch() {
            assert_eq!(s.n_total() as usize, um.len());
        }
    }

    #[test]
    fn small_structure() {
        let mut um = UpdatableMedian::new(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(um.n0(), 3);
        assert_eq!(um.rebuild_count(), 1);
        assert_eq!(um.query_exact().unwrap(), 2.0);

        let mut um = UpdatableMedian::new(&[1.0, 3.0, 5.0]).unwrap();
        um.add(&[7.0, 9.0]).unwrap();
        assert_eq!(um.query_exact().unwrap(), 5.0);
        assert!(UpdatableMedian::<f64>::new(&[]).is_err());
    }

    #[test]
    fn add_maps_against_frozen_range() {
        // mean 0, population sigma 1
        let base = [-1.0, 1.0, -1.0, 1.0];
        let mut um = UpdatableMedian::new(&base).unwrap();
        let before = um.sketch().unwrap().counts()[500];
        um.add(&[0.0]).unwrap();
        assert_eq!(um.sketch().unwrap().counts()[500], before + 1);

        let left = um.sketch().unwrap().n_left();
        let in_bins: u64 = um.sketch().unwrap().counts().iter().sum();
        um.add(&[-3.0, -2.0, -1.5]).unwrap();
        assert_eq!(um.sketch().unwrap().n_left(), left + 3);
        assert_eq!(um.sketch().unwrap().counts().iter().sum::<u64>(), in_bins);
        check_conservation(&um);
    }

    #[test]
    fn constant_base_rebuilds_on_distinct_value() {
        let mut um = UpdatableMedian::new(&[4.0; 5]).unwrap();
        assert!(um.sketch().is_none());
        assert_eq!(um.query_exact().unwrap(), 4.0);
        um.add(&[4.0]).unwrap();
        assert_eq!(um.query_exact().unwrap(), 4.0);
        assert_eq!(um.rebuild_count(), 1);
        um.add(&[10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0]).unwrap();
        assert_eq!(um.query_exact().unwrap(), 10.0);
        assert_eq!(um.rebuild_count(), 2);
        assert!(um.sketch().is_some());
    }

    #[test]
    fn add_then_remove_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base: Vec<f64> = (0..501).map(|_| rng.gen()).collect();
        let mut um = UpdatableMedian::new(&base).unwrap();
        let m0 = um.query_exact().unwrap();
        let extra: Vec<f64> = (0..40).map(|_| rng.gen::<f64>() * 2.0).collect();
        um.add(&extra).unwrap();
        um.remove(&extra).unwrap();
        assert_eq!(um.query_exact().unwrap(), m0);
        assert_eq!(um.data(), &base[..]);
    }

    #[test]
    fn remove_missing_value_fails_cleanly() {
        let mut um = UpdatableMedian::new(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(um.remove(&[2.0, 7.0]), Err(MedianError::NotPresent(7.0)));
        assert_eq!(um.remove(&[2.0, 2.0]), Err(MedianError::NotPresent(2.0)));
        assert_eq!(um.len(), 3);
        um.remove(&[2.0]).unwrap();
        assert_eq!(um.query_exact().unwrap(), 2.0);
        um.remove(&[1.0, 3.0]).unwrap();
        assert_eq!(um.query_exact(), Err(MedianError::Empty));
        assert_eq!(um.query_approx(), Err(MedianError::Empty));
        um.add(&[6.0]).unwrap();
        assert_eq!(um.query_exact().unwrap(), 6.0);
    }

    #[test]
    fn approx_bound_without_adds_is_sigma_over_bins() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base: Vec<f64> = (0..1001).map(|_| rng.gen::<f64>() * 10.0).collect();
        let mut um = UpdatableMedian::new(&base).unwrap();
        let a = um.query_approx().unwrap();
        let sigma0 = Moments::of(&base).std_dev();
        assert_eq!(a.bound, sigma0 / 1000.0);
        assert!((a.value - oracle(&base)).abs() <= a.bound);

        let more: Vec<f64> = (0..1001).map(|_| rng.gen::<f64>() * 10.0).collect();
        um.add(&more).unwrap();
        let a = um.query_approx().unwrap();
        assert_eq!(um.rebuild_count(), 1);
        assert!((a.bound - 2f64.sqrt() * sigma0 / 1000.0).abs() < 1e-15);
        assert!((a.bound - sigma0 / 707.1).abs() < 1e-6 * sigma0);
    }

    #[test]
    fn exact_query_touches_data_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let base: Vec<f64> = (0..20_001).map(|_| rng.gen()).collect();
        let mut um = UpdatableMedian::new(&base).unwrap();
        let batch: Vec<f64> = (0..100).map(|_| rng.gen()).collect();
        um.add(&batch).unwrap();
        um.query_exact().unwrap();
        assert_eq!(um.rebuild_count(), 1);
        assert_eq!(um.last_query_stats().data_passes, 1);
        um.add(&[0.5]).unwrap();
        um.query_exact().unwrap();
        assert_eq!(um.last_query_stats().data_passes, 1);
    }

    #[test]
    fn drift_forces_rebuild_and_stays_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base: Vec<f64> = (0..1001).map(|_| rng.gen()).collect();
        let mut all = base.clone();
        let mut um = UpdatableMedian::new(&base).unwrap();
        for j in 1..=10 {
            let batch: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>() + j as f64).collect();
            um.add(&batch).unwrap();
            all.extend_from_slice(&batch);
            assert_eq!(um.query_exact().unwrap(), oracle(&all));
            let a = um.query_approx().unwrap();
            assert!((a.value - oracle(&all)).abs() <= a.bound);
            check_conservation(&um);
        }
        assert!(um.rebuild_count() > 1);
        let mut fresh = UpdatableMedian::new(&all).unwrap();
        assert_eq!(um.query_exact().unwrap(), fresh.query_exact().unwrap());
    }

    #[test]
    fn randomized_add_remove_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let base: Vec<f64> = (0..300).map(|_| (rng.gen_range(0..50) as f64) * 0.25).collect();
        let mut um = UpdatableMedian::with_params(&base, BinParams::new(16, 4).unwrap()).unwrap();
        let mut shadow = base.clone();
        for _ in 0..200 {
            if rng.gen_bool(0.6) || shadow.len() < 10 {
                let k = rng.gen_range(1..20);
                let pts: Vec<f64> = (0..k).map(|_| rng.gen_range(-20..80) as f64 * 0.25).collect();
                um.add(&pts).unwrap();
                shadow.extend_from_slice(&pts);
            } else {
                let k = rng.gen_range(1..10);
                let pts: Vec<f64> = (0..k).map(|_| shadow[rng.gen_range(0..shadow.len())]).collect();
                // duplicates in `pts` may exceed availability; mirror via the shadow
                let mut tmp = shadow.clone();
                let ok = pts.iter().all(|p| match tmp.iter().position(|x| x == p) {
                    Some(i) => {
                        tmp.remove(i);
                        true
                    }
                    None => false,
                });
                let res = um.remove(&pts);
                assert_eq!(res.is_ok(), ok);
                if ok {
                    shadow = tmp;
                }
            }
            assert_eq!(um.query_exact().unwrap(), oracle(&shadow));
            check_conservation(&um);
        }
    }
}
