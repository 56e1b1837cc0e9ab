use binmedian::*;
use proptest::prelude::*;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1e6f64..1e6, 1..400),
        prop::collection::vec((-5i32..5).prop_map(f64::from), 1..400),
        prop::collection::vec(prop::num::f64::NORMAL, 1..200),
    ]
}

fn bounded() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1e6f64..1e6, 1..400),
        prop::collection::vec((-5i32..5).prop_map(f64::from), 1..400),
    ]
}

fn oracle(v: &[f64]) -> f64 {
    sort_median(&mut v.to_vec()).unwrap()
}

fn slack(a: f64, b: f64, bound: f64) -> f64 {
    8.0 * f64::EPSILON * (a.abs() + b.abs() + bound * 1000.0)
}

proptest! {
    #[test]
    fn binmedian_matches_sort(v in values(), bins in 2usize..50, cutoff in 1usize..30) {
        let want = oracle(&v);
        prop_assert_eq!(binmedian(&v).unwrap().to_bits(), want.to_bits());
        let params = BinParams::new(bins, cutoff).unwrap();
        prop_assert_eq!(binmedian_with(&v, params).unwrap().to_bits(), want.to_bits());
        prop_assert_eq!(median_select(&mut v.clone()).unwrap().to_bits(), want.to_bits());
    }

    #[test]
    fn select_kth_is_order_statistic(v in values(), k in any::<prop::sample::Index>()) {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let k = k.index(v.len()) + 1;
        prop_assert_eq!(select_kth(&mut v.clone(), k).unwrap(), sorted[k - 1]);
    }

    #[test]
    fn binapprox_within_bound(v in values()) {
        let want = oracle(&v);
        let a = binapprox_with(&v, 1000).unwrap();
        let err = (a.value - want).abs();
        prop_assert!(err <= a.bound + slack(a.value, want, a.bound), "err {} bound {}", err, a.bound);
    }

    #[test]
    fn input_is_not_reordered(v in values()) {
        let copy = v.clone();
        binmedian(&v).unwrap();
        binapprox(&v).unwrap();
        prop_assert_eq!(v, copy);
    }

    #[test]
    fn every_point_lands_in_one_slot(v in values(), bins in 2usize..2000) {
        let m = Moments::of(&v);
        let Ok(sk) = build_sketch(&v, m.mean(), m.std_dev(), bins) else {
            prop_assert!(v.iter().all(|&x| x == v[0]) || !m.std_dev().is_finite());
            return Ok(());
        };
        prop_assert_eq!(sk.n_total(), v.len() as u64);
        prop_assert_eq!(sk.counts().len(), bins);
        let r = *sk.range();
        for &x in &v {
            match bin_index(x, &r, bins) {
                BinIndex::Left => prop_assert!(x < r.lo()),
                BinIndex::Right => prop_assert!(x > r.hi()),
                BinIndex::In(i) => prop_assert!(i < bins),
            }
        }
    }

    #[test]
    fn moments_merge_is_associative(v in bounded(), cut1 in any::<prop::sample::Index>(), cut2 in any::<prop::sample::Index>()) {
        let (mut i, mut j) = (cut1.index(v.len() + 1), cut2.index(v.len() + 1));
        if i > j { std::mem::swap(&mut i, &mut j); }
        let (a, b, c) = (partial_moments(&v[..i]), partial_moments(&v[i..j]), partial_moments(&v[j..]));
        let left = merge_moments(merge_moments(a, b), c);
        let right = merge_moments(a, merge_moments(b, c));
        let all = Moments::of(&v);
        let scale = all.mean().abs() + all.std_dev() + 1.0;
        prop_assert!((left.mean() - right.mean()).abs() <= 1e-9 * scale);
        prop_assert!((left.mean() - all.mean()).abs() <= 1e-9 * scale);
        prop_assert!((left.std_dev() - all.std_dev()).abs() <= 1e-6 * scale);
    }

    #[test]
    fn count_merge_matches_whole(v in values(), cut in any::<prop::sample::Index>(), bins in 2usize..100) {
        let i = cut.index(v.len() + 1);
        let m = Moments::of(&v);
        let Some(range) = BinRange::around(m.mean(), m.std_dev()) else { return Ok(()); };
        let a = partial_counts(&v[..i], range, bins).unwrap();
        let b = partial_counts(&v[i..], range, bins).unwrap();
        let whole = partial_counts(&v, range, bins).unwrap();
        let ab = merge_counts(&a, &b).unwrap();
        let ba = merge_counts(&b, &a).unwrap();
        prop_assert_eq!(&ab, &whole);
        prop_assert_eq!(&ba, &whole);
    }

    #[test]
    fn distributed_exact_matches_sort(v in values(), cuts in prop::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        let mut idx: Vec<usize> = cuts.iter().map(|c| c.index(v.len() + 1)).collect();
        idx.push(0);
        idx.push(v.len());
        idx.sort_unstable();
        let parts: Vec<&[f64]> = idx.windows(2).map(|w| &v[w[0]..w[1]]).collect();
        let got = distributed_binmedian(&parts, BinParams::default()).unwrap();
        prop_assert_eq!(got.to_bits(), oracle(&v).to_bits());
    }

    #[test]
    fn updatable_tracks_sort(base in values(), adds in prop::collection::vec(values(), 1..4)) {
        let mut um = UpdatableMedian::new(&base).unwrap();
        let mut all = base.clone();
        for batch in &adds {
            um.add(batch).unwrap();
            all.extend_from_slice(batch);
            let want = oracle(&all);
            prop_assert_eq!(um.query_exact().unwrap(), want);
            let a = um.query_approx().unwrap();
            prop_assert!((a.value - want).abs() <= a.bound + slack(a.value, want, a.bound));
        }
        let removed: Vec<f64> = all.iter().step_by(3).copied().collect();
        um.remove(&removed).unwrap();
        let mut rest = all.clone();
        for x in &removed {
            let p = rest.iter().position(|y| y == x).unwrap();
            rest.swap_remove(p);
        }
        if !rest.is_empty() {
            prop_assert_eq!(um.query_exact().unwrap(), oracle(&rest));
        }
    }

    #[test]
    fn f32_binmedian_matches_sort(v in prop::collection::vec(-1e4f32..1e4, 1..300)) {
        let want = sort_median(&mut v.clone()).unwrap();
        prop_assert_eq!(binmedian(&v).unwrap().to_bits(), want.to_bits());
    }
}
