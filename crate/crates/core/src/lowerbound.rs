//! Executable form of the encoding argument behind the space lower bound.
//!
//! A one-sided filter for length-`L` queries built over an `L`-well-separated set is turned
//! into a lossless code for the set: the filter bytes, the positions of the occupied top
//! intervals among those the filter reports non-empty, and one extra bit for every covering
//! interval pair in which the truly empty side is a false positive. Decoding replays the
//! queries against the stored filter to recover every point bit by bit.

use bitvec::prelude::*;
use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bits::mix_seed;
use crate::error::{Error, Result};
use crate::filter::{RangeEmptiness, RangeFilter};
use crate::params::{Epsilon, Interval, Params, PointSet};

const POINT_ATTEMPTS: usize = 10_000;
/// Retries over filter seeds when looking for a build within the Markov thresholds.
pub const MAX_SEED_RETRIES: usize = 16;

/// Points pairwise at least `2L` apart and inside `[2L - 1, U - 2L]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellSepSet {
    pts: Vec<u64>,
    universe_bits: u32,
    max_len: u64,
}

fn check_shape(universe_bits: u32, max_len: u64) -> Result<()> {
    if !(1..=63).contains(&universe_bits) {
        return Err(Error::param("universe_bits", format!("{universe_bits} is not in 1..=63")));
    }
    if !max_len.is_power_of_two() || max_len.trailing_zeros() > universe_bits {
        return Err(Error::param("max_len", format!("{max_len} is not a power of two within the universe")));
    }
    Ok(())
}

impl WellSepSet {
    /// Validates an explicit point list.
    pub fn new(mut pts: Vec<u64>, universe_bits: u32, max_len: u64) -> Result<Self> {
        check_shape(universe_bits, max_len)?;
        pts.sort_unstable();
        let u = 1u64 << universe_bits;
        let two_l = 2 * max_len;
        for &x in &pts {
            if x + 1 < two_l || x > u.saturating_sub(two_l) || u < two_l {
                return Err(Error::param("points", format!("{x} is too close to the universe ends")));
            }
        }
        for w in pts.windows(2) {
            if w[1] - w[0] < two_l {
                return Err(Error::param("points", format!("{} and {} are closer than 2L", w[0], w[1])));
            }
        }
        Ok(WellSepSet { pts, universe_bits, max_len })
    }

    pub fn points(&self) -> &[u64] {
        &self.pts
    }

    pub fn universe_bits(&self) -> u32 {
        self.universe_bits
    }

    pub fn max_len(&self) -> u64 {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// Draws a random well-separated set one point at a time, rejecting candidates that land too
/// close to an earlier point. Requires `L <= U / 5n`.
pub fn gen_wellsep(n: usize, universe_bits: u32, max_len: u64, seed: u64) -> Result<WellSepSet> {
    check_shape(universe_bits, max_len)?;
    let u = 1u64 << universe_bits;
    if n > 0 && (max_len as u128) * 5 * (n as u128) > u as u128 {
        return Err(Error::param("max_len", format!("L = {max_len} exceeds U / 5n")));
    }
    let two_l = 2 * max_len;
    let (lo, hi) = (two_l - 1, u - two_l);
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut pts: Vec<u64> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..POINT_ATTEMPTS {
            let x = rng.gen_range(lo..=hi);
            let i = pts.partition_point(|&p| p < x);
            let clear_left = i == 0 || x - pts[i - 1] >= two_l;
            let clear_right = i == pts.len() || pts[i] - x >= two_l;
            if clear_left && clear_right {
                pts.insert(i, x);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::RetryExhausted { what: "a well-separated point", attempts: POINT_ATTEMPTS });
        }
    }
    Ok(WellSepSet { pts, universe_bits, max_len })
}

/// `((U - 4nL) / n)^n`, the guaranteed number of well-separated sets, as `lg` of it.
pub fn lemma_floor_bits(n: usize, universe_bits: u32, max_len: u64) -> f64 {
    let u = (1u128 << universe_bits) as f64;
    let n = n as f64;
    if n == 0.0 {
        return 0.0;
    }
    n * ((u - 4.0 * n * max_len as f64) / n).log2()
}

/// `T_j = [jL, (j + 1)L - 1]`.
pub fn top_interval(j: u64, max_len: u64) -> Interval {
    Interval { a: j * max_len, b: j * max_len + (max_len - 1) }
}

/// Index of the top interval containing `x`.
pub fn top_index(x: u64, max_len: u64) -> u64 {
    x / max_len
}

/// The level-`i` covering intervals `(l_i(x), r_i(x))`, each of length `L`, for
/// `1 <= i <= lg L`. `x` lies in the left one iff bit `i` of `x` (counting the least significant
/// bit as bit 1) is zero.
pub fn cover_intervals(x: u64, level: u32, max_len: u64) -> Result<(Interval, Interval)> {
    let lg = max_len.trailing_zeros();
    if !max_len.is_power_of_two() || level == 0 || level > lg {
        return Err(Error::param("level", format!("{level} is not in 1..={lg}")));
    }
    let mid = (x >> level << level) + (1 << (level - 1));
    if mid < max_len || mid.checked_add(max_len - 1).is_none() {
        return Err(Error::param("x", format!("covering intervals of {x} leave the universe")));
    }
    Ok((Interval { a: mid - max_len, b: mid - 1 }, Interval { a: mid, b: mid + (max_len - 1) }))
}

/// Rank of a strictly increasing subset of `[0, m)` in the combinatorial number system
/// (colexicographic order): `sum over t of C(c_t, t + 1)`.
pub fn subset_rank(m: u64, subset: &[u64]) -> Result<BigUint> {
    let mut rank = BigUint::zero();
    for (t, &c) in subset.iter().enumerate() {
        if c >= m || (t > 0 && subset[t - 1] >= c) {
            return Err(Error::MalformedSubset(format!("{subset:?} is not an increasing subset of [0, {m})")));
        }
        rank += binomial(BigUint::from(c), BigUint::from(t + 1));
    }
    Ok(rank)
}

/// Inverse of [`subset_rank`] for `n`-subsets of `[0, m)`.
pub fn subset_unrank(m: u64, n: usize, rank: &BigUint) -> Result<Vec<u64>> {
    if (n as u64) > m || rank >= &binomial(BigUint::from(m), BigUint::from(n)) {
        return Err(Error::MalformedSubset(format!("rank out of range for {n}-subsets of [0, {m})")));
    }
    let mut rank = rank.clone();
    let mut out = vec![0u64; n];
    let mut upper = m;
    for t in (0..n).rev() {
        let k = BigUint::from(t + 1);
        // Largest c < upper with C(c, t + 1) <= rank.
        let (mut lo, mut hi) = (t as u64, upper);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if binomial(BigUint::from(mid), k.clone()) <= rank {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rank -= binomial(BigUint::from(lo), k);
        out[t] = lo;
        upper = lo;
    }
    Ok(out)
}

/// Bits needed to write any rank below `C(m, n)`.
pub fn subset_rank_bits(m: u64, n: usize) -> u64 {
    if (n as u64) > m {
        return 0;
    }
    let count = binomial(BigUint::from(m), BigUint::from(n));
    if count <= BigUint::one() {
        0
    } else {
        (count - 1u32).bits()
    }
}

/// Fixed header written after the filter bytes: n, w, L, |T*|.
pub const HEADER_BITS: u64 = 32 + 8 + 64 + 64;

/// A well-separated set encoded through a one-sided filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbEncoding {
    pub bits: BitVec<u8, Msb0>,
    /// Size of the embedded filter, `s`.
    pub filter_bits: u64,
    /// Top intervals answered non-empty, `|T*|`.
    pub nonempty_tops: u64,
    /// False positives among the top intervals, `A`.
    pub top_false_positives: u64,
    /// Ambiguity bits written, `B`.
    pub ambiguity_bits: u64,
    pub subset_bits: u64,
    pub header_bits: u64,
}

impl LbEncoding {
    pub fn total_bits(&self) -> u64 {
        self.bits.len() as u64
    }
}

/// Per-trial summary printed by the demo driver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbTrial {
    pub n: usize,
    pub w: u32,
    #[serde(rename = "L")]
    pub max_len: u64,
    pub epsilon: f64,
    pub s_bits: u64,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "B")]
    pub b: u64,
    pub subset_bits: u64,
    pub total_bits: u64,
    pub lemma_floor_bits: f64,
    pub roundtrip_ok: bool,
}

fn push_uint(bits: &mut BitVec<u8, Msb0>, value: u64, width: u32) {
    for i in (0..width).rev() {
        bits.push(value >> i & 1 == 1);
    }
}

struct BitCursor<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl BitCursor<'_> {
    fn bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or_else(|| Error::decode("bit stream exhausted"))?;
        self.pos += 1;
        Ok(b)
    }

    fn uint(&mut self, width: u32) -> Result<u64> {
        let mut v = 0;
        for _ in 0..width {
            v = v << 1 | self.bit()? as u64;
        }
        Ok(v)
    }
}

fn filter_params(set: &WellSepSet, epsilon: Epsilon, seed: u64) -> Result<Params> {
    Params::new(set.universe_bits, set.max_len, epsilon, set.len() as u64, seed)
}

fn nonempty_tops(filter: &RangeFilter, universe_bits: u32, max_len: u64) -> Result<Vec<u64>> {
    let tops = (1u64 << universe_bits) / max_len;
    let mut out = Vec::new();
    for j in 0..tops {
        if filter.query(top_interval(j, max_len))? {
            out.push(j);
        }
    }
    Ok(out)
}

/// Encodes `set` using a filter built with `seed`.
pub fn encode(set: &WellSepSet, epsilon: Epsilon, seed: u64) -> Result<LbEncoding> {
    let params = filter_params(set, epsilon, seed)?;
    let points = PointSet::new(set.pts.clone(), set.universe_bits)?;
    let filter = RangeFilter::build(&points, params)?;
    let filter_bytes = filter.to_bytes();
    let l = set.max_len;

    let t_star = nonempty_tops(&filter, set.universe_bits, l)?;
    let positions: Vec<u64> = set
        .pts
        .iter()
        .map(|&x| {
            t_star
                .binary_search(&top_index(x, l))
                .map(|p| p as u64)
                .map_err(|_| Error::decode("filter reported an occupied top interval as empty"))
        })
        .collect::<Result<_>>()?;
    let rank = subset_rank(t_star.len() as u64, &positions)?;
    let subset_bits = subset_rank_bits(t_star.len() as u64, set.len());

    let mut bits: BitVec<u8, Msb0> = BitVec::from_vec(filter_bytes);
    let filter_bits = bits.len() as u64;
    push_uint(&mut bits, set.len() as u64, 32);
    push_uint(&mut bits, set.universe_bits as u64, 8);
    push_uint(&mut bits, l, 64);
    push_uint(&mut bits, t_star.len() as u64, 64);
    let rank_bytes = rank.to_bytes_be();
    let mut rank_bits: BitVec<u8, Msb0> = BitVec::from_vec(rank_bytes);
    let lead = rank_bits.len() - rank_bits.leading_zeros();
    rank_bits = rank_bits[rank_bits.len() - lead..].to_bitvec();
    for _ in lead as u64..subset_bits {
        bits.push(false);
    }
    bits.extend_from_bitslice(&rank_bits);

    let mut ambiguity = 0;
    for &x in &set.pts {
        for level in (1..=l.trailing_zeros()).rev() {
            let (left, right) = cover_intervals(x, level, l)?;
            if filter.query(left)? && filter.query(right)? {
                bits.push(right.contains(x));
                ambiguity += 1;
            }
        }
    }

    Ok(LbEncoding {
        bits,
        filter_bits,
        nonempty_tops: t_star.len() as u64,
        top_false_positives: (t_star.len() - set.len()) as u64,
        ambiguity_bits: ambiguity,
        subset_bits,
        header_bits: HEADER_BITS,
    })
}

/// Tries up to [`MAX_SEED_RETRIES`] derived seeds and keeps the first encoding whose counts
/// satisfy `A <= 2 eps U / L` and `B <= 2 eps n lg L`, or the shortest one otherwise.
pub fn encode_with_retries(set: &WellSepSet, epsilon: Epsilon, seed: u64) -> Result<LbEncoding> {
    let eps = *epsilon.numer() as f64 / *epsilon.denom() as f64;
    let tops = ((1u64 << set.universe_bits) / set.max_len) as f64;
    let a_max = 2.0 * eps * tops;
    let b_max = 2.0 * eps * set.len() as f64 * set.max_len.trailing_zeros() as f64;
    let mut best: Option<LbEncoding> = None;
    for t in 0..MAX_SEED_RETRIES as u64 {
        let enc = encode(set, epsilon, if t == 0 { seed } else { mix_seed(seed, t) })?;
        if enc.top_false_positives as f64 <= a_max && enc.ambiguity_bits as f64 <= b_max {
            return Ok(enc);
        }
        if best.as_ref().is_none_or(|b| enc.total_bits() < b.total_bits()) {
            best = Some(enc);
        }
    }
    Ok(best.expect("at least one attempt"))
}

/// Recovers the set from an encoding.
pub fn decode(bits: &BitSlice<u8, Msb0>) -> Result<WellSepSet> {
    // The filter is byte aligned at the front of the stream.
    let mut bytes = Vec::with_capacity(bits.len() / 8);
    for chunk in bits.chunks_exact(8) {
        bytes.push(chunk.load_be::<u8>());
    }
    let (filter, used) = RangeFilter::decode_prefix(&bytes)?;
    let mut cur = BitCursor { bits, pos: used * 8 };
    let n = cur.uint(32)? as usize;
    let w = cur.uint(8)? as u32;
    let l = cur.uint(64)?;
    let t_count = cur.uint(64)?;
    let p = filter.params();
    if w != p.universe_bits() || l != p.max_len() || n as u64 != p.n() {
        return Err(Error::decode("encoding header disagrees with the embedded filter"));
    }
    check_shape(w, l)?;

    let t_star = nonempty_tops(&filter, w, l)?;
    if t_star.len() as u64 != t_count {
        return Err(Error::decode("non-empty top interval count mismatch"));
    }
    let subset_bits = subset_rank_bits(t_count, n);
    let mut rank = BigUint::zero();
    for _ in 0..subset_bits {
        rank = (rank << 1u32) + BigUint::from(cur.bit()? as u8);
    }
    let positions = subset_unrank(t_count, n, &rank)?;

    let mut pts = Vec::with_capacity(n);
    for pos in positions {
        let mut x = t_star[pos as usize] * l;
        for level in (1..=l.trailing_zeros()).rev() {
            let (left, right) = cover_intervals(x, level, l)?;
            let bit = match (filter.query(left)?, filter.query(right)?) {
                (true, false) => false,
                (false, true) => true,
                (true, true) => cur.bit()?,
                (false, false) => return Err(Error::decode("both covering intervals reported empty")),
            };
            if bit {
                x |= 1 << (level - 1);
            }
        }
        pts.push(x);
    }
    if cur.pos != bits.len() {
        return Err(Error::decode("unused bits after decoding"));
    }
    WellSepSet::new(pts, w, l)
}

/// Encodes, decodes and summarizes one random set.
pub fn run_trial(n: usize, universe_bits: u32, max_len: u64, epsilon: Epsilon, seed: u64) -> Result<LbTrial> {
    let set = gen_wellsep(n, universe_bits, max_len, seed)?;
    let enc = encode_with_retries(&set, epsilon, mix_seed(seed, 0xF1))?;
    let roundtrip_ok = decode(&enc.bits).map(|d| d == set).unwrap_or(false);
    Ok(LbTrial {
        n,
        w: universe_bits,
        max_len,
        epsilon: *epsilon.numer() as f64 / *epsilon.denom() as f64,
        s_bits: enc.filter_bits,
        a: enc.top_false_positives,
        b: enc.ambiguity_bits,
        subset_bits: enc.subset_bits,
        total_bits: enc.total_bits(),
        lemma_floor_bits: lemma_floor_bits(n, universe_bits, max_len).floor(),
        roundtrip_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::epsilon;

    #[test]
    fn top_interval_examples() {
        assert_eq!(top_index(21, 8), 2);
        assert_eq!(top_interval(2, 8), Interval { a: 16, b: 23 });
        assert_eq!(top_interval(0, 8), Interval { a: 0, b: 7 });
        assert_eq!(top_index((1 << 10) - 1, 8), (1 << 10) / 8 - 1);
        for x in 0..1000 {
            assert!(top_interval(top_index(x, 16), 16).contains(x));
        }
    }

    #[test]
    fn cover_interval_examples() {
        let (l, r) = cover_intervals(21, 2, 8).unwrap();
        assert_eq!((l, r), (Interval { a: 14, b: 21 }, Interval { a: 22, b: 29 }));
        assert!(l.contains(21));
        let (l, r) = cover_intervals(21, 1, 8).unwrap();
        assert_eq!((l, r), (Interval { a: 13, b: 20 }, Interval { a: 21, b: 28 }));
        assert!(r.contains(21));
        assert!(cover_intervals(21, 0, 8).is_err());
        assert!(cover_intervals(21, 4, 8).is_err());
        assert!(cover_intervals(1, 3, 8).is_err());
    }

    #[test]
    fn subset_rank_examples() {
        assert_eq!(subset_rank(10, &[0, 1, 2]).unwrap(), BigUint::zero());
        assert_eq!(subset_rank(5, &[1, 3]).unwrap(), BigUint::from(4u32));
        assert!(subset_rank(5, &[3, 1]).is_err());
        assert!(subset_rank(5, &[1, 5]).is_err());
        assert!(subset_unrank(5, 2, &BigUint::from(10u32)).is_err());
        assert_eq!(subset_rank_bits(5, 2), 4);
        assert_eq!(subset_rank_bits(5, 5), 0);
        assert_eq!(subset_rank_bits(5, 0), 0);
        assert_eq!(subset_unrank(7, 0, &BigUint::zero()).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn generated_sets_are_well_separated() {
        for seed in 0..20 {
            let s = gen_wellsep(32, 20, 64, seed).unwrap();
            assert_eq!(s.len(), 32);
            assert!(WellSepSet::new(s.points().to_vec(), 20, 64).is_ok());
        }
        let one = gen_wellsep(1, 6, 2, 1).unwrap();
        assert!((3..=60).contains(&one.points()[0]));
        assert!(gen_wellsep(8, 8, 16, 0).is_err());
        assert!(WellSepSet::new(vec![10, 12], 8, 2).is_err());
        assert!(WellSepSet::new(vec![2], 8, 2).is_err());
    }

    #[test]
    fn round_trip_small() {
        let eps = epsilon(1, 8).unwrap();
        for seed in 0..10 {
            let set = gen_wellsep(6, 14, 16, seed).unwrap();
            let enc = encode(&set, eps, seed).unwrap();
            assert_eq!(enc.total_bits(), enc.filter_bits + enc.header_bits + enc.subset_bits + enc.ambiguity_bits);
            assert_eq!(decode(&enc.bits).unwrap(), set);
        }
    }

    #[test]
    fn single_point_round_trip() {
        let set = WellSepSet::new(vec![1000], 12, 64).unwrap();
        let enc = encode(&set, epsilon(1, 4).unwrap(), 5).unwrap();
        assert!(enc.ambiguity_bits <= 6);
        assert_eq!(decode(&enc.bits).unwrap(), set);
    }

    #[test]
    fn tampering_is_detected() {
        let eps = epsilon(1, 2).unwrap();
        let mut tried = 0;
        for seed in 0..40 {
            let set = gen_wellsep(8, 14, 16, seed).unwrap();
            let enc = encode(&set, eps, seed).unwrap();
            if enc.ambiguity_bits == 0 {
                continue;
            }
            tried += 1;
            let mut bad = enc.bits.clone();
            let last = bad.len() - 1;
            let flipped = !bad[last];
            bad.set(last, flipped);
            assert_ne!(decode(&bad).ok(), Some(set.clone()));
            let mut short = enc.bits.clone();
            short.pop();
            assert!(decode(&short).is_err());
        }
        assert!(tried > 0);
    }
}
