//! Universe reduction: a pairwise-independent hash on blocks of size `r` turned into a
//! locality-preserving map `h(x) = (u(x / r) + x) mod r`.

use arrayvec::ArrayVec;

use crate::bits::splitmix64;
use crate::error::{Error, Result};
use crate::params::{Interval, Params};

/// Hash of a block index into `[r]`.
pub trait BlockHash {
    /// Returns a value in `[0, r)`.
    fn hash_block(&self, block: u64) -> u64;
}

const TABLES: usize = 8;

/// Simple tabulation over the eight bytes of a 64-bit key.
///
/// Table contents are the splitmix64 stream for `seed`, table-major then index-minor.
#[derive(Clone)]
pub struct TabulationHash {
    tables: Box<[[u64; 256]; TABLES]>,
    mask: u64,
}

impl TabulationHash {
    pub fn new(seed: u64, mask: u64) -> Self {
        let mut state = seed;
        let mut tables = Box::new([[0u64; 256]; TABLES]);
        for table in tables.iter_mut() {
            for entry in table.iter_mut() {
                *entry = splitmix64(&mut state);
            }
        }
        TabulationHash { tables, mask }
    }

    /// Full 64-bit hash before masking.
    #[inline]
    pub fn raw(&self, key: u64) -> u64 {
        let bytes = key.to_le_bytes();
        let mut h = 0;
        for (table, &b) in self.tables.iter().zip(bytes.iter()) {
            h ^= table[b as usize];
        }
        h
    }

    #[inline]
    pub fn eval(&self, key: u64) -> u64 {
        self.raw(key) & self.mask
    }

    pub fn table_word(&self, table: usize, index: usize) -> u64 {
        self.tables[table][index]
    }
}

impl BlockHash for TabulationHash {
    #[inline]
    fn hash_block(&self, block: u64) -> u64 {
        self.eval(block)
    }
}

impl std::fmt::Debug for TabulationHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TabulationHash").field("mask", &self.mask).finish_non_exhaustive()
    }
}

/// Circular interval `{(start + j) mod r : 0 <= j < len}` in `[r]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircularInterval {
    pub start: u64,
    pub len: u128,
}

impl CircularInterval {
    /// Splits at the wrap point into one or two linear intervals of `[r]`, `r = mask + 1`.
    pub fn linear_parts(&self, mask: u64) -> ArrayVec<Interval, 2> {
        debug_assert!(self.len >= 1 && self.len <= mask as u128 + 1);
        let mut out = ArrayVec::new();
        let end = self.start as u128 + self.len - 1;
        if end <= mask as u128 {
            out.push(Interval { a: self.start, b: end as u64 });
        } else {
            out.push(Interval { a: self.start, b: mask });
            out.push(Interval { a: 0, b: (end - mask as u128 - 1) as u64 });
        }
        out
    }
}

/// The reduction `h(x) = (u(floor(x / r)) + x) mod r`.
#[derive(Debug, Clone)]
pub struct LocalityHash<H = TabulationHash> {
    reduced_bits: u32,
    mask: u64,
    u: H,
}

impl LocalityHash<TabulationHash> {
    pub fn new(params: &Params) -> Self {
        let mask = params.reduced_mask();
        LocalityHash { reduced_bits: params.reduced_bits(), mask, u: TabulationHash::new(params.seed(), mask) }
    }
}

impl<H: BlockHash> LocalityHash<H> {
    /// Uses an arbitrary block hash over a reduced universe of `2^reduced_bits`.
    pub fn with_block_hash(reduced_bits: u32, u: H) -> Self {
        assert!(reduced_bits <= 64);
        LocalityHash { reduced_bits, mask: crate::bits::low_mask(reduced_bits), u }
    }

    pub fn block_hash(&self) -> &H {
        &self.u
    }

    pub fn reduced_mask(&self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn block_of(&self, x: u64) -> u64 {
        if self.reduced_bits >= 64 {
            0
        } else {
            x >> self.reduced_bits
        }
    }

    /// `h(x)`.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.u.hash_block(self.block_of(x)).wrapping_add(x) & self.mask
    }

    /// Image of `interval` as at most two circular intervals, one per touched block.
    pub fn circular_image(&self, interval: Interval) -> Result<ArrayVec<CircularInterval, 2>> {
        let r = self.mask as u128 + 1;
        if interval.a > interval.b {
            return Err(Error::InvalidInterval { a: interval.a, b: interval.b, reason: "a > b".into() });
        }
        if interval.len() > r {
            return Err(Error::IntervalTooLong { a: interval.a, b: interval.b, len: interval.len(), max: r });
        }
        let mut out = ArrayVec::new();
        let (first, last) = (self.block_of(interval.a), self.block_of(interval.b));
        if first == last {
            out.push(CircularInterval { start: self.eval(interval.a), len: interval.len() });
        } else {
            // Length at most r, so exactly two consecutive blocks.
            let boundary = last << self.reduced_bits;
            out.push(CircularInterval { start: self.eval(interval.a), len: (boundary - interval.a) as u128 });
            out.push(CircularInterval { start: self.eval(boundary), len: (interval.b - boundary) as u128 + 1 });
        }
        Ok(out)
    }

    /// The exact image `h(I)` as at most four linear intervals of `[r]`.
    pub fn image_of_interval(&self, interval: Interval) -> Result<ArrayVec<Interval, 4>> {
        let mut out = ArrayVec::new();
        for c in self.circular_image(interval)? {
            out.extend(c.linear_parts(self.mask));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::epsilon;
    use std::collections::BTreeSet;

    /// Block hash with hand-picked shifts.
    struct Fixed(Vec<u64>);

    impl BlockHash for Fixed {
        fn hash_block(&self, block: u64) -> u64 {
            self.0[block as usize]
        }
    }

    fn iv(a: u64, b: u64) -> Interval {
        Interval { a, b }
    }

    #[test]
    fn tabulation_is_deterministic_and_masked() {
        let a = TabulationHash::new(7, (1 << 12) - 1);
        let b = TabulationHash::new(7, (1 << 12) - 1);
        for t in 0..TABLES {
            for i in 0..256 {
                assert_eq!(a.table_word(t, i), b.table_word(t, i));
            }
        }
        for k in 0..10_000u64 {
            assert!(a.eval(k.wrapping_mul(0x9E37_79B9)) < 1 << 12);
        }
        let zero = TabulationHash::new(0, u64::MAX);
        assert_eq!(zero.table_word(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn eval_examples() {
        let lh = LocalityHash::with_block_hash(4, Fixed(vec![5]));
        assert_eq!(lh.eval(3), 8);
        let lh = LocalityHash::with_block_hash(4, Fixed(vec![14]));
        assert_eq!(lh.eval(3), 1);
    }

    #[test]
    fn image_examples() {
        let lh = LocalityHash::with_block_hash(4, Fixed(vec![5, 9]));
        assert_eq!(lh.image_of_interval(iv(12, 18)).unwrap().as_slice(), &[iv(1, 4), iv(9, 11)]);

        let lh = LocalityHash::with_block_hash(4, Fixed(vec![14]));
        assert_eq!(lh.image_of_interval(iv(0, 3)).unwrap().as_slice(), &[iv(14, 15), iv(0, 1)]);
        assert_eq!(lh.image_of_interval(iv(7, 7)).unwrap().as_slice(), &[iv(5, 5)]);
        assert_eq!(lh.image_of_interval(iv(0, 15)).unwrap().as_slice(), &[iv(14, 15), iv(0, 13)]);
        assert!(lh.image_of_interval(iv(0, 16)).is_err());
    }

    #[test]
    fn image_is_exact_exhaustive() {
        let bits = 5;
        let r = 1u64 << bits;
        for seed in 0..4 {
            let params = Params::new(12, 1, epsilon(1, 2).unwrap(), 1, seed).unwrap();
            let mask = r - 1;
            let lh = LocalityHash::with_block_hash(bits, TabulationHash::new(params.seed(), mask));
            for a in 0..(4 * r) {
                for len in 1..=r {
                    let i = iv(a, a + len - 1);
                    let expect: BTreeSet<u64> = (i.a..=i.b).map(|x| lh.eval(x)).collect();
                    let parts = lh.image_of_interval(i).unwrap();
                    assert!(parts.len() <= 4);
                    let got: BTreeSet<u64> = parts.iter().flat_map(|p| p.a..=p.b).collect();
                    assert_eq!(got, expect, "interval {i:?}");
                }
            }
        }
    }

    #[test]
    fn block_is_a_cyclic_shift() {
        let params = Params::new(20, 4, epsilon(1, 4).unwrap(), 64, 3).unwrap();
        let lh = LocalityHash::new(&params);
        let r = params.reduced_size() as u64;
        for block in [0u64, 1, 77] {
            let base = block * r;
            let mut seen = vec![false; r as usize];
            for x in base..base + r {
                let h = lh.eval(x);
                assert!(!seen[h as usize]);
                seen[h as usize] = true;
                assert_eq!(h.wrapping_sub(lh.eval(base)) & lh.reduced_mask(), x - base);
            }
        }
    }

    #[test]
    fn full_universe_reduction() {
        let params = Params::new(64, 1, epsilon(1, 2).unwrap(), u64::MAX, 9).unwrap();
        let lh = LocalityHash::new(&params);
        assert_eq!(lh.block_of(u64::MAX), 0);
        assert_eq!(lh.eval(u64::MAX), lh.eval(0).wrapping_sub(1));
        let parts = lh.image_of_interval(iv(0, u64::MAX)).unwrap();
        let covered: u128 = parts.iter().map(|p| p.len()).sum();
        assert_eq!(covered, 1u128 << 64);
    }
}
