//! Exact range emptiness and reporting over a power-of-two universe `[R]`.
//!
//! The universe is cut into `B = 2^ceil(lg n)` equal buckets. `D1` has one bit per bucket
//! marking the non-empty ones; `D2` holds, for each non-empty bucket in order, a one followed
//! by as many zeros as the bucket has points. The points themselves are stored as
//! bucket-relative offsets of `lg(R/B)` bits, sorted and concatenated in bucket order.
//!
//! A query splits into the fully covered buckets in the middle (answered by two ranks on
//! `D1`) and at most two partially covered end buckets. Inside a partial bucket with local
//! range `[a, b]` and `p = lcp(a, b)`, the range is non-empty iff the largest key with prefix
//! `p0` is at least `a` or the smallest key with prefix `p1` is at most `b`; each side costs one
//! weak prefix search plus a key inspection.

use std::ops::Range;

use crate::bits::{lcp, low_mask};
use crate::error::{Error, Result};
use crate::params::Interval;
use crate::prefix::{IndexKind, PrefixIndex, SortedKeys, ZFastTrie};
use crate::succinct::{BitVector, PackedInts};

/// Per-query work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Probes {
    /// Interval queries issued to an exact range structure.
    pub range_queries: u64,
    /// Weak prefix searches.
    pub prefix_searches: u64,
    /// Point membership probes (Bloom baseline).
    pub point_probes: u64,
}

impl std::ops::AddAssign for Probes {
    fn add_assign(&mut self, rhs: Probes) {
        self.range_queries += rhs.range_queries;
        self.prefix_searches += rhs.prefix_searches;
        self.point_probes += rhs.point_probes;
    }
}

/// Sorted array answering by successor search. Ground truth for tests and harnesses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortedOracle {
    pts: Vec<u64>,
}

impl SortedOracle {
    /// `pts` must be sorted and distinct.
    pub fn new(pts: Vec<u64>) -> Self {
        debug_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        SortedOracle { pts }
    }

    pub fn successor(&self, x: u64) -> Option<u64> {
        let i = self.pts.partition_point(|&p| p < x);
        self.pts.get(i).copied()
    }

    pub fn query(&self, i: Interval) -> bool {
        self.successor(i.a).is_some_and(|s| s <= i.b)
    }

    pub fn report(&self, i: Interval) -> &[u64] {
        let lo = self.pts.partition_point(|&p| p < i.a);
        let hi = self.pts.partition_point(|&p| p <= i.b);
        &self.pts[lo..hi.max(lo)]
    }

    pub fn points(&self) -> &[u64] {
        &self.pts
    }
}

/// The offsets stored for one bucket.
struct BucketKeys<'a> {
    offsets: &'a PackedInts,
    start: usize,
    len: usize,
}

impl SortedKeys for BucketKeys<'_> {
    fn key_count(&self) -> usize {
        self.len
    }

    fn key(&self, i: usize) -> u64 {
        self.offsets.get(self.start + i)
    }
}

/// Space usage of a [`BucketedRangeStructure`] in bits, as laid out on disk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct StructureBits {
    pub offsets: u64,
    pub d1: u64,
    pub d2: u64,
    pub index: u64,
}

impl StructureBits {
    pub fn total(&self) -> u64 {
        self.offsets + self.d1 + self.d2 + self.index
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum BucketIndex {
    BinarySearch,
    ZFast(Vec<ZFastTrie>),
}

/// Succinct exact range emptiness and reporting structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketedRangeStructure {
    universe_bits: u32,
    bucket_bits: u32,
    d1: BitVector,
    d2: BitVector,
    offsets: PackedInts,
    index: BucketIndex,
}

/// `lg B` for `n` points in a universe of `2^universe_bits`.
pub fn bucket_bits_for(n: usize, universe_bits: u32) -> u32 {
    let lg = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() };
    lg.min(universe_bits)
}

impl BucketedRangeStructure {
    /// Builds over sorted, distinct `points < 2^universe_bits`.
    pub fn build(points: &[u64], universe_bits: u32, kind: IndexKind) -> Result<Self> {
        if universe_bits > 64 {
            return Err(Error::param("universe_bits", format!("{universe_bits} exceeds 64")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::DuplicatePoint(w[0]));
            }
            if w[0] > w[1] {
                return Err(Error::Unsorted(i + 1));
            }
        }
        if let Some(&last) = points.last() {
            crate::params::check_point(last, universe_bits)?;
        }
        let bucket_bits = bucket_bits_for(points.len(), universe_bits);
        if bucket_bits > 40 {
            return Err(Error::param("points", "too many points for a bucket directory"));
        }
        let width = universe_bits - bucket_bits;
        let buckets = 1usize << bucket_bits;

        let mut d1 = vec![false; buckets];
        let mut d2 = Vec::with_capacity(2 * points.len());
        let mut offsets = PackedInts::with_width(width);
        let mut segments: Vec<Range<usize>> = Vec::new();
        let mut i = 0;
        while i < points.len() {
            let bucket = shr(points[i], width) as usize;
            let start = i;
            while i < points.len() && shr(points[i], width) as usize == bucket {
                offsets.push(points[i] & low_mask(width));
                i += 1;
            }
            d1[bucket] = true;
            d2.push(true);
            d2.extend(std::iter::repeat_n(false, i - start));
            segments.push(start..i);
        }

        let index = match kind {
            IndexKind::BinarySearch => BucketIndex::BinarySearch,
            IndexKind::ZFast => BucketIndex::ZFast(
                segments
                    .iter()
                    .map(|s| ZFastTrie::build(&BucketKeys { offsets: &offsets, start: s.start, len: s.len() }, width))
                    .collect(),
            ),
        };

        Ok(BucketedRangeStructure {
            universe_bits,
            bucket_bits,
            d1: BitVector::from_bits(d1),
            d2: BitVector::from_bits(d2),
            offsets,
            index,
        })
    }

    /// Reassembles a structure from its stored parts, validating their consistency.
    pub fn from_parts(
        universe_bits: u32,
        bucket_bits: u32,
        d1: BitVector,
        d2: BitVector,
        offsets: PackedInts,
        tries: Option<Vec<ZFastTrie>>,
    ) -> Result<Self> {
        if bucket_bits > universe_bits || bucket_bits > 40 || universe_bits > 64 || d1.len() != 1usize << bucket_bits {
            return Err(Error::decode("bucket directory size mismatch"));
        }
        let width = universe_bits - bucket_bits;
        let nonempty = d1.count_ones();
        if d2.count_ones() != nonempty || d2.count_zeros() != offsets.len() || offsets.width() != width {
            return Err(Error::decode("point directory does not match bucket directory"));
        }
        if nonempty > 0 && d2.get(0) != Some(true) {
            return Err(Error::decode("point directory must start with a bucket marker"));
        }
        if d2.len() > 1 && d2.get(d2.len() - 1) == Some(true) {
            return Err(Error::decode("empty bucket in point directory"));
        }
        for j in 1..nonempty {
            let pos = d2.select1(j).expect("counted above");
            if d2.get(pos - 1) == Some(true) {
                return Err(Error::decode("empty bucket in point directory"));
            }
        }
        let index = match tries {
            None => BucketIndex::BinarySearch,
            Some(t) if t.len() == nonempty => BucketIndex::ZFast(t),
            Some(_) => return Err(Error::decode("prefix index count mismatch")),
        };
        let st = BucketedRangeStructure { universe_bits, bucket_bits, d1, d2, offsets, index };
        for j in 0..nonempty {
            let seg = st.segment_by_rank(j);
            for k in seg.start + 1..seg.end {
                if st.offsets.get(k - 1) >= st.offsets.get(k) {
                    return Err(Error::decode("bucket offsets are not strictly increasing"));
                }
            }
        }
        Ok(st)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn universe_bits(&self) -> u32 {
        self.universe_bits
    }

    pub fn bucket_bits(&self) -> u32 {
        self.bucket_bits
    }

    /// `lg(R/B)`, the stored bits per point.
    pub fn offset_width(&self) -> u32 {
        self.universe_bits - self.bucket_bits
    }

    pub fn d1(&self) -> &BitVector {
        &self.d1
    }

    pub fn d2(&self) -> &BitVector {
        &self.d2
    }

    pub fn offsets(&self) -> &PackedInts {
        &self.offsets
    }

    pub fn index_kind(&self) -> IndexKind {
        match self.index {
            BucketIndex::BinarySearch => IndexKind::BinarySearch,
            BucketIndex::ZFast(_) => IndexKind::ZFast,
        }
    }

    /// Per-bucket prefix index blobs, in bucket order. Empty for the binary search index.
    pub fn index_blobs(&self) -> Vec<Vec<u8>> {
        match &self.index {
            BucketIndex::BinarySearch => Vec::new(),
            BucketIndex::ZFast(tries) => tries
                .iter()
                .map(|t| {
                    let mut b = Vec::new();
                    t.to_bytes(&mut b);
                    b
                })
                .collect(),
        }
    }

    /// Number of points in each non-empty bucket, in bucket order.
    pub fn bucket_sizes(&self) -> Vec<usize> {
        (0..self.d1.count_ones()).map(|j| self.segment_by_rank(j).len()).collect()
    }

    pub fn space(&self) -> StructureBits {
        let index = self.index_blobs().iter().map(|b| 32 + 8 * b.len() as u64).sum();
        StructureBits {
            offsets: self.offsets.bits() as u64,
            d1: self.d1.payload_bits() as u64,
            d2: self.d2.payload_bits() as u64,
            index,
        }
    }

    /// Stored points, decoded, in increasing order.
    pub fn points(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.d1.count_ones() {
            let bucket = self.d1.select1(j).expect("rank in range") as u64;
            for k in self.segment_by_rank(j) {
                out.push(self.point_at(bucket, k));
            }
        }
        out
    }

    #[inline]
    fn point_at(&self, bucket: u64, k: usize) -> u64 {
        shl(bucket, self.offset_width()) | self.offsets.get(k)
    }

    #[inline]
    fn bucket_of(&self, x: u64) -> usize {
        shr(x, self.offset_width()) as usize
    }

    /// Offset indices of the `j`-th non-empty bucket: the select on `D2`, scaled.
    #[inline]
    fn segment_by_rank(&self, j: usize) -> Range<usize> {
        let marker = self.d2.select1(j).expect("bucket rank in range");
        let next = self.d2.select1(j + 1).unwrap_or(self.d2.len());
        let start = marker - j;
        start..start + (next - marker - 1)
    }

    #[inline]
    fn keys(&self, seg: &Range<usize>) -> BucketKeys<'_> {
        BucketKeys { offsets: &self.offsets, start: seg.start, len: seg.len() }
    }

    fn weak_prefix_in(&self, rank: usize, seg: &Range<usize>, p: crate::bits::Prefix, probes: &mut Probes) -> Range<usize> {
        probes.prefix_searches += 1;
        let keys = self.keys(seg);
        match &self.index {
            BucketIndex::BinarySearch => crate::prefix::binary_search_prefix(&keys, self.offset_width(), p),
            BucketIndex::ZFast(tries) => tries[rank].weak_prefix(p),
        }
    }

    /// Weak prefix search inside `bucket` (bucket-relative ranks), `None` for empty buckets.
    pub fn weak_prefix(&self, bucket: usize, p: crate::bits::Prefix) -> Option<Range<usize>> {
        if p.len > self.offset_width() || self.d1.get(bucket) != Some(true) {
            return None;
        }
        let rank = self.d1.rank1_unchecked(bucket);
        let seg = self.segment_by_rank(rank);
        let idx = match &self.index {
            BucketIndex::BinarySearch => PrefixIndex::BinarySearch { width: self.offset_width() },
            BucketIndex::ZFast(tries) => PrefixIndex::ZFast(tries[rank].clone()),
        };
        Some(idx.weak_prefix(&self.keys(&seg), p))
    }

    /// Whether bucket `bucket` holds an offset in `[lo, hi]`.
    fn partial(&self, bucket: usize, lo: u64, hi: u64, probes: &mut Probes) -> bool {
        if !self.d1.get(bucket).unwrap_or(false) {
            return false;
        }
        let width = self.offset_width();
        if width == 0 {
            return true;
        }
        let rank = self.d1.rank1_unchecked(bucket);
        let seg = self.segment_by_rank(rank);
        let keys = self.keys(&seg);
        let inside = |k: u64| lo <= k && k <= hi;
        let p = lcp(lo, hi, width);
        if p.len == width {
            let r = self.weak_prefix_in(rank, &seg, p, probes);
            return !r.is_empty() && inside(keys.key(r.start));
        }
        let left = self.weak_prefix_in(rank, &seg, p.push(false), probes);
        if !left.is_empty() && inside(keys.key(left.end - 1)) {
            return true;
        }
        let right = self.weak_prefix_in(rank, &seg, p.push(true), probes);
        !right.is_empty() && inside(keys.key(right.start))
    }

    /// Range emptiness with work counters: true iff a stored point lies in `i`.
    pub fn query_counted(&self, i: Interval, probes: &mut Probes) -> Result<bool> {
        i.check_universe(self.universe_bits)?;
        probes.range_queries += 1;
        if self.d1.count_ones() == 0 {
            return Ok(false);
        }
        let width = self.offset_width();
        let (first, last) = (self.bucket_of(i.a), self.bucket_of(i.b));
        let (lo, hi) = (i.a & low_mask(width), i.b & low_mask(width));
        if first == last {
            return Ok(self.partial(first, lo, hi, probes));
        }
        if last - first > 1 && self.d1.rank1_unchecked(last) > self.d1.rank1_unchecked(first + 1) {
            return Ok(true);
        }
        Ok(self.partial(first, lo, low_mask(width), probes) || self.partial(last, 0, hi, probes))
    }

    pub fn query_range(&self, i: Interval) -> Result<bool> {
        self.query_counted(i, &mut Probes::default())
    }

    /// All stored points in `i`, increasing. Locates the first point at or after `i.a` and walks
    /// right through non-empty buckets via `D1`/`D2` until passing `i.b`.
    pub fn report_range(&self, i: Interval) -> Result<Vec<u64>> {
        i.check_universe(self.universe_bits)?;
        let mut out = Vec::new();
        let nonempty = self.d1.count_ones();
        if nonempty == 0 {
            return Ok(out);
        }
        let width = self.offset_width();
        let start_bucket = self.bucket_of(i.a);
        let mut rank = self.d1.rank1_unchecked(start_bucket);
        let mut k = if self.d1.get(start_bucket) == Some(true) {
            let seg = self.segment_by_rank(rank);
            let keys = self.keys(&seg);
            let lo = i.a & low_mask(width);
            let (mut a, mut b) = (0, seg.len());
            while a < b {
                let mid = a + (b - a) / 2;
                if keys.key(mid) < lo {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            if a == seg.len() {
                rank += 1;
                None
            } else {
                Some(seg.start + a)
            }
        } else {
            None
        };

        while rank < nonempty {
            let bucket = self.d1.select1(rank).expect("rank in range") as u64;
            let seg = self.segment_by_rank(rank);
            for idx in k.take().unwrap_or(seg.start)..seg.end {
                let x = self.point_at(bucket, idx);
                if x > i.b {
                    return Ok(out);
                }
                out.push(x);
            }
            rank += 1;
        }
        Ok(out)
    }
}

#[inline]
fn shr(x: u64, s: u32) -> u64 {
    if s >= 64 {
        0
    } else {
        x >> s
    }
}

#[inline]
fn shl(x: u64, s: u32) -> u64 {
    if s >= 64 {
        0
    } else {
        x << s
    }
}
