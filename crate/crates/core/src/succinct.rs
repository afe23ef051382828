//! Static bit vector with rank/select directories, and a fixed-width integer array.
//!
//! The rank directory interleaves, for every 512-bit superblock, the absolute number of ones
//! before it and seven 9-bit counts relative to the superblock start (one per word after the
//! first). Select keeps the superblock holding every 512th one and finishes with a short scan.
//! Directory overhead is therefore 128 bits per 512 payload bits plus 64 bits per 512 ones.

const WORDS_PER_SUPER: usize = 8;
const BITS_PER_SUPER: usize = 64 * WORDS_PER_SUPER;
const SELECT_SAMPLE: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    // Pairs (absolute rank, packed relative ranks), one pair per superblock plus a sentinel.
    rank_dir: Vec<u64>,
    // Superblock index holding the (k * SELECT_SAMPLE)-th one.
    select_dir: Vec<u32>,
}

impl BitVector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % 64);
            }
            len += 1;
        }
        Self::from_words(words, len).expect("padding is zero by construction")
    }

    /// Builds from little-endian payload words. Bits at positions `>= len` must be zero.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Option<Self> {
        let needed = len.div_ceil(64);
        if words.len() != needed {
            return None;
        }
        if !len.is_multiple_of(64) && words[needed - 1] >> (len % 64) != 0 {
            return None;
        }
        words.shrink_to_fit();
        let mut bv = BitVector { words, len, ..Default::default() };
        bv.build_directories();
        Some(bv)
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn from_str_bits(s: &str) -> Self {
        Self::from_bits(s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1'))
    }

    fn build_directories(&mut self) {
        let supers = self.words.len().div_ceil(WORDS_PER_SUPER);
        let mut rank_dir = Vec::with_capacity(2 * (supers + 1));
        let mut select_dir = Vec::new();
        let mut total = 0usize;
        for (s, chunk) in self.words.chunks(WORDS_PER_SUPER).enumerate() {
            let mut rel = 0u64;
            let mut local = 0u64;
            for (i, w) in chunk.iter().enumerate() {
                if i > 0 {
                    rel |= local << (9 * (i - 1));
                }
                let ones = w.count_ones() as u64;
                // Record the superblock for every sampled one that falls in this word.
                let before = total + local as usize;
                let mut next = before.div_ceil(SELECT_SAMPLE) * SELECT_SAMPLE;
                while next < before + ones as usize {
                    select_dir.push(s as u32);
                    next += SELECT_SAMPLE;
                }
                local += ones;
            }
            for i in chunk.len()..WORDS_PER_SUPER {
                if i > 0 {
                    rel |= local << (9 * (i - 1));
                }
            }
            rank_dir.push(total as u64);
            rank_dir.push(rel);
            total += local as usize;
        }
        rank_dir.push(total as u64);
        rank_dir.push(0);
        self.ones = total;
        self.rank_dir = rank_dir;
        self.select_dir = select_dir;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.words[i / 64] >> (i % 64) & 1 == 1)
    }

    /// Number of ones strictly before position `i`, for `i <= len`.
    #[inline]
    pub fn rank1(&self, i: usize) -> Option<usize> {
        if i > self.len {
            return None;
        }
        Some(self.rank1_unchecked(i))
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, i: usize) -> usize {
        let word = i / 64;
        let sup = i / BITS_PER_SUPER;
        let sub = word % WORDS_PER_SUPER;
        let abs = self.rank_dir[2 * sup] as usize;
        let rel = if sub == 0 { 0 } else { (self.rank_dir[2 * sup + 1] >> (9 * (sub - 1))) & 0x1FF };
        let bit = i % 64;
        let inword = if bit == 0 { 0 } else { (self.words[word] << (64 - bit)).count_ones() };
        abs + rel as usize + inword as usize
    }

    /// Position of the one with rank `j` (0-based), for `j < count_ones`.
    #[inline]
    pub fn select1(&self, j: usize) -> Option<usize> {
        if j >= self.ones {
            return None;
        }
        // Superblock s with abs[s] <= j < abs[s + 1].
        let sample = j / SELECT_SAMPLE;
        let mut lo = self.select_dir[sample] as usize;
        let mut hi = match self.select_dir.get(sample + 1) {
            Some(&s) => s as usize + 1,
            None => self.rank_dir.len() / 2 - 1,
        };
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.rank_dir[2 * mid] as usize <= j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut rem = (j - self.rank_dir[2 * lo] as usize) as u64;
        let rel = self.rank_dir[2 * lo + 1];
        let mut sub = 0;
        while sub < WORDS_PER_SUPER - 1 && (rel >> (9 * sub)) & 0x1FF <= rem {
            sub += 1;
        }
        if sub > 0 {
            rem -= (rel >> (9 * (sub - 1))) & 0x1FF;
        }
        let word = lo * WORDS_PER_SUPER + sub;
        Some(word * 64 + select_in_word(self.words[word], rem as u32) as usize)
    }

    /// Bits used by the rank and select directories.
    pub fn directory_bits(&self) -> usize {
        self.rank_dir.len() * 64 + self.select_dir.len() * 32
    }

    /// Bits used by the payload words.
    pub fn payload_bits(&self) -> usize {
        self.words.len() * 64
    }
}

/// Position of the `k`-th set bit of `w` (0-based).
#[inline]
fn select_in_word(mut w: u64, k: u32) -> u32 {
    for _ in 0..k {
        w &= w - 1;
    }
    w.trailing_zeros()
}

/// Array of unsigned integers of a fixed bit width, packed into little-endian words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PackedInts {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

impl PackedInts {
    pub fn with_width(width: u32) -> Self {
        assert!(width <= 64);
        PackedInts { words: Vec::new(), width, len: 0 }
    }

    pub fn from_slice(width: u32, values: &[u64]) -> Self {
        let mut p = Self::with_width(width);
        p.words.reserve((values.len() * width as usize).div_ceil(64));
        for &v in values {
            p.push(v);
        }
        p
    }

    pub fn from_words(words: Vec<u64>, width: u32, len: usize) -> Option<Self> {
        if width > 64 || words.len() != (len * width as usize).div_ceil(64) {
            return None;
        }
        Some(PackedInts { words, width, len })
    }

    pub fn push(&mut self, v: u64) {
        let w = self.width as usize;
        debug_assert!(w == 64 || v >> w == 0);
        let pos = self.len * w;
        self.len += 1;
        if w == 0 {
            return;
        }
        while self.words.len() * 64 < pos + w {
            self.words.push(0);
        }
        let (word, bit) = (pos / 64, pos % 64);
        self.words[word] |= v << bit;
        if bit + w > 64 {
            self.words[word + 1] |= v >> (64 - bit);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let w = self.width as usize;
        if w == 0 {
            return 0;
        }
        let pos = i * w;
        let (word, bit) = (pos / 64, pos % 64);
        let mut v = self.words[word] >> bit;
        if bit + w > 64 {
            v |= self.words[word + 1] << (64 - bit);
        }
        v & crate::bits::low_mask(self.width)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bits(&self) -> usize {
        self.words.len() * 64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn naive_rank(bits: &[bool], i: usize) -> usize {
        bits[..i].iter().filter(|&&b| b).count()
    }

    fn naive_select(bits: &[bool], j: usize) -> Option<usize> {
        bits.iter().enumerate().filter(|(_, &b)| b).nth(j).map(|(p, _)| p)
    }

    #[test]
    fn examples() {
        let empty = BitVector::from_bits(std::iter::empty());
        assert_eq!(empty.rank1(0), Some(0));
        assert_eq!(empty.select1(0), None);

        let v = BitVector::from_str_bits("10110");
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.rank1(0), Some(0));
        assert_eq!(v.rank1(3), Some(2));
        assert_eq!(v.rank1(5), Some(3));
        assert_eq!(v.rank1(6), None);
        assert_eq!(v.select1(0), Some(0));
        assert_eq!(v.select1(2), Some(3));
        assert_eq!(v.select1(3), None);

        let one = BitVector::from_str_bits("1");
        assert_eq!(one.select1(0), Some(0));

        let ones = BitVector::from_bits(std::iter::repeat_n(true, 64));
        for k in 0..64 {
            assert_eq!(ones.select1(k), Some(k));
        }
    }

    #[test]
    fn payload_round_trips() {
        let v = BitVector::from_str_bits("1101 0000 1");
        let w = BitVector::from_words(v.words().to_vec(), v.len()).unwrap();
        assert_eq!(v, w);
        assert_eq!((0..9).map(|i| w.get(i).unwrap()).collect::<Vec<_>>(), [
            true, true, false, true, false, false, false, false, true
        ]);
        assert!(BitVector::from_words(vec![1 << 9], 9).is_none());
        assert!(BitVector::from_words(vec![0, 0], 9).is_none());
    }

    #[test]
    fn exhaustive_against_naive() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for m in (0..=4096).step_by(37).chain([4096]) {
            for density in [0.02, 0.5, 0.97] {
                let bits: Vec<bool> = (0..m).map(|_| rng.gen_bool(density)).collect();
                let v = BitVector::from_bits(bits.iter().copied());
                for i in 0..=m {
                    assert_eq!(v.rank1(i), Some(naive_rank(&bits, i)));
                }
                for j in 0..=v.count_ones() {
                    assert_eq!(v.select1(j), naive_select(&bits, j));
                }
            }
        }
    }

    #[test]
    fn large_random_against_prefix_counts() {
        let m = 10_000_000;
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let words: Vec<u64> = (0..m / 64).map(|_| rng.gen::<u64>() & rng.gen::<u64>()).collect();
        let v = BitVector::from_words(words.clone(), m).unwrap();
        let mut prefix = Vec::with_capacity(words.len() + 1);
        let mut acc = 0;
        for w in &words {
            prefix.push(acc);
            acc += w.count_ones() as usize;
        }
        prefix.push(acc);
        let scan_rank = |i: usize| {
            let (w, b) = (i / 64, i % 64);
            prefix[w] + if b == 0 { 0 } else { (words[w] & ((1u64 << b) - 1)).count_ones() as usize }
        };
        for _ in 0..100_000 {
            let i = rng.gen_range(0..=m);
            assert_eq!(v.rank1(i), Some(scan_rank(i)));
            let j = rng.gen_range(0..v.count_ones());
            let p = v.select1(j).unwrap();
            assert_eq!(v.get(p), Some(true));
            assert_eq!(scan_rank(p), j);
        }
        assert!(v.directory_bits() as f64 <= 0.5 * m as f64);
    }

    #[test]
    fn directory_overhead_is_bounded() {
        for m in [4096usize, 100_000, 1 << 20] {
            let v = BitVector::from_bits((0..m).map(|_| true));
            assert!(v.directory_bits() as f64 <= 0.5 * m as f64, "m = {m}");
        }
    }

    #[test]
    fn packed_ints_examples() {
        for width in [0u32, 1, 7, 15, 33, 63, 64] {
            let values: Vec<u64> = (0..200u64).map(|i| i.wrapping_mul(0x9E37_79B9_7F4A_7C15) & crate::bits::low_mask(width)).collect();
            let p = PackedInts::from_slice(width, &values);
            assert_eq!(p.len(), 200);
            assert_eq!(p.words().len(), (200 * width as usize).div_ceil(64));
            for (i, &v) in values.iter().enumerate() {
                assert_eq!(p.get(i), v);
            }
            let q = PackedInts::from_words(p.words().to_vec(), width, 200).unwrap();
            assert_eq!(p, q);
        }
    }

    proptest! {
        #[test]
        fn rank_select_invariants(bits in proptest::collection::vec(any::<bool>(), 0..3000)) {
            let v = BitVector::from_bits(bits.iter().copied());
            for j in 0..v.count_ones() {
                let p = v.select1(j).unwrap();
                prop_assert_eq!(v.rank1(p), Some(j));
                prop_assert_eq!(v.get(p), Some(true));
            }
            for (i, &bit) in bits.iter().enumerate() {
                prop_assert_eq!(v.rank1(i + 1).unwrap() - v.rank1(i).unwrap(), bit as usize);
            }
        }
    }
}
