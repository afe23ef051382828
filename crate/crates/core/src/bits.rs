//! Word-level bit utilities shared by every structure in the crate.

/// Index of the highest set bit (0 = least significant), `None` for zero.
#[inline]
pub fn msb(x: u64) -> Option<u32> {
    if x == 0 {
        None
    } else {
        Some(63 - x.leading_zeros())
    }
}

/// Mask selecting the low `bits` bits of a word. Saturates at 64.
#[inline]
pub fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A big-endian bit prefix of length `len`, stored right-aligned in `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prefix {
    pub len: u32,
    pub bits: u64,
}

impl Prefix {
    pub const EMPTY: Prefix = Prefix { len: 0, bits: 0 };

    /// Prefix from a textual bit string such as `"101"`.
    pub fn parse(s: &str) -> Option<Prefix> {
        if s.len() > 64 {
            return None;
        }
        let mut bits = 0u64;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                _ => return None,
            };
            bits = (bits << 1) | b;
        }
        Some(Prefix { len: s.len() as u32, bits })
    }

    /// The first `len` bits of the `width`-bit value `value`.
    #[inline]
    pub fn of(value: u64, width: u32, len: u32) -> Prefix {
        debug_assert!(len <= width && width <= 64);
        let bits = if len == 0 { 0 } else { value >> (width - len) };
        Prefix { len, bits }
    }

    /// This prefix extended by a single bit.
    #[inline]
    pub fn push(self, bit: bool) -> Prefix {
        debug_assert!(self.len < 64);
        Prefix { len: self.len + 1, bits: (self.bits << 1) | bit as u64 }
    }

    /// The first `len` bits of this prefix.
    #[inline]
    pub fn truncate(self, len: u32) -> Prefix {
        debug_assert!(len <= self.len);
        if len == 0 {
            Prefix::EMPTY
        } else {
            Prefix { len, bits: self.bits >> (self.len - len) }
        }
    }

    /// Smallest and largest `width`-bit values starting with this prefix.
    #[inline]
    pub fn span(self, width: u32) -> (u64, u64) {
        debug_assert!(self.len <= width && width <= 64);
        let free = width - self.len;
        if self.len == 0 {
            (0, low_mask(width))
        } else {
            let lo = self.bits << free;
            (lo, lo | low_mask(free))
        }
    }

    /// Whether the `width`-bit value `value` starts with this prefix.
    #[inline]
    pub fn matches(self, value: u64, width: u32) -> bool {
        Prefix::of(value, width, self.len) == self
    }
}

impl std::fmt::Display for Prefix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in (0..self.len).rev() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

/// Longest common prefix of the `width`-bit big-endian representations of `a` and `b`.
#[inline]
pub fn lcp(a: u64, b: u64, width: u32) -> Prefix {
    debug_assert!(width <= 64);
    let len = match msb(a ^ b) {
        None => width,
        Some(top) => width - 1 - top,
    };
    Prefix::of(a, width, len)
}

/// The number with the most trailing zeros in the half-open range `(a, b]`.
///
/// Requires `a < b`.
#[inline]
pub(crate) fn two_fattest(a: u32, b: u32) -> u32 {
    debug_assert!(a < b);
    b & (u32::MAX << (31 - (a ^ b).leading_zeros()))
}

/// One step of the splitmix64 generator: advances `state` and returns the next output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless mix of two words through splitmix64, used to derive per-trial seeds.
#[inline]
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut s)
}
