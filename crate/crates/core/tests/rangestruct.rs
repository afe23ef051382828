use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rangefilter::{BucketedRangeStructure, IndexKind, Interval, Probes, SortedOracle};

fn random_set(rng: &mut impl Rng, n: usize, bits: u32) -> Vec<u64> {
    let hi = rangefilter::bits::low_mask(bits);
    let mut v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=hi)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[test]
fn index_kinds_agree_on_random_queries() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for round in 0..20 {
        let bits = [16, 24, 32, 48][round % 4];
        let n = rng.gen_range(1..3000);
        let pts = random_set(&mut rng, n, bits);
        let bs = BucketedRangeStructure::build(&pts, bits, IndexKind::BinarySearch).unwrap();
        let zf = BucketedRangeStructure::build(&pts, bits, IndexKind::ZFast).unwrap();
        let oracle = SortedOracle::new(pts.clone());
        assert_eq!(bs.points(), pts);
        assert_eq!(zf.points(), pts);
        let hi = rangefilter::bits::low_mask(bits);
        for _ in 0..5000 {
            let a = rng.gen_range(0..=hi);
            let len = 1u64 << rng.gen_range(0..bits.min(20));
            let b = a.saturating_add(rng.gen_range(0..len)).min(hi);
            let i = Interval::new(a, b).unwrap();
            let want = oracle.query(i);
            assert_eq!(bs.query_range(i).unwrap(), want);
            assert_eq!(zf.query_range(i).unwrap(), want);
            assert_eq!(zf.report_range(i).unwrap(), oracle.report(i));
        }
    }
}

#[test]
fn partial_bucket_queries_use_at_most_four_prefix_searches() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let pts = random_set(&mut rng, 5000, 32);
    for kind in [IndexKind::BinarySearch, IndexKind::ZFast] {
        let s = BucketedRangeStructure::build(&pts, 32, kind).unwrap();
        for _ in 0..20_000 {
            let a = rng.gen_range(0..u32::MAX as u64);
            let b = a.saturating_add(rng.gen_range(0..1 << 24)).min(u32::MAX as u64);
            let mut p = Probes::default();
            s.query_counted(Interval::new(a, b).unwrap(), &mut p).unwrap();
            assert!(p.prefix_searches <= 4);
        }
    }
}

#[test]
fn space_matches_the_directory_layout() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let pts = random_set(&mut rng, 1000, 30);
    let s = BucketedRangeStructure::build(&pts, 30, IndexKind::BinarySearch).unwrap();
    let bits = s.space();
    let buckets = 1u64 << s.bucket_bits();
    assert_eq!(s.bucket_bits(), 10);
    assert_eq!(s.offset_width(), 20);
    let words = |b: u64| b.div_ceil(64) * 64;
    assert_eq!(bits.d1, words(buckets));
    assert_eq!(bits.offsets, words(20 * pts.len() as u64));
    let nonempty = s.bucket_sizes().iter().filter(|&&c| c > 0).count() as u64;
    assert_eq!(bits.d2, words(nonempty + pts.len() as u64));
    assert_eq!(s.bucket_sizes().iter().sum::<usize>(), pts.len());
}

proptest! {
    #[test]
    fn matches_sorted_oracle(
        raw in prop::collection::btree_set(0u64..1 << 12, 0..200),
        queries in prop::collection::vec((0u64..1 << 12, 0u64..1 << 12), 1..200),
        zfast in any::<bool>(),
    ) {
        let pts: Vec<u64> = raw.into_iter().collect();
        let kind = if zfast { IndexKind::ZFast } else { IndexKind::BinarySearch };
        let s = BucketedRangeStructure::build(&pts, 12, kind).unwrap();
        let oracle = SortedOracle::new(pts);
        for (x, y) in queries {
            let i = Interval::new(x.min(y), x.max(y)).unwrap();
            prop_assert_eq!(s.query_range(i).unwrap(), oracle.query(i));
            prop_assert_eq!(s.report_range(i).unwrap(), oracle.report(i).to_vec());
        }
    }

    #[test]
    fn rejects_intervals_outside_the_universe(b in (1u64 << 12)..u64::MAX) {
        let s = BucketedRangeStructure::build(&[1, 2, 3], 12, IndexKind::BinarySearch).unwrap();
        prop_assert!(s.query_range(Interval::new(0, b).unwrap()).is_err());
    }
}
