//! Problem configuration and the basic value types: intervals and point sets.

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// False positive rate carried as an exact fraction.
pub type Epsilon = Ratio<u64>;

/// Denominator used when converting a floating-point rate to an [`Epsilon`].
pub const EPSILON_FLOAT_DENOMINATOR: u64 = 1_000_000_000;

/// Converts a floating-point rate to an exact fraction with denominator 10^9.
pub fn epsilon_from_f64(eps: f64) -> Result<Epsilon> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::param("epsilon", format!("{eps} is not in (0, 1)")));
    }
    let num = (eps * EPSILON_FLOAT_DENOMINATOR as f64).round() as u64;
    epsilon(num, EPSILON_FLOAT_DENOMINATOR)
}

/// Builds a validated fraction `num/den` in `(0, 1)`.
pub fn epsilon(num: u64, den: u64) -> Result<Epsilon> {
    if den == 0 || num == 0 || num >= den {
        return Err(Error::param("epsilon", format!("{num}/{den} is not in (0, 1)")));
    }
    Ok(Ratio::new(num, den))
}

/// Validated problem configuration.
///
/// The reduced universe size is `r = 2^reduced_bits`, the smallest power of two that is at
/// least `n * L / epsilon`, clamped to the universe size `2^universe_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    universe_bits: u32,
    max_len: u64,
    epsilon: Epsilon,
    n: u64,
    reduced_bits: u32,
    seed: u64,
}

impl Params {
    pub fn new(universe_bits: u32, max_len: u64, epsilon: Epsilon, n: u64, seed: u64) -> Result<Self> {
        if !(1..=64).contains(&universe_bits) {
            return Err(Error::param("universe_bits", format!("{universe_bits} is not in 1..=64")));
        }
        if !max_len.is_power_of_two() {
            return Err(Error::param("max_len", format!("{max_len} is not a power of two")));
        }
        let len_bits = max_len.trailing_zeros();
        if len_bits > universe_bits {
            return Err(Error::param("max_len", format!("{max_len} exceeds the universe 2^{universe_bits}")));
        }
        let (num, den) = (*epsilon.numer(), *epsilon.denom());
        if num == 0 || num >= den {
            return Err(Error::param("epsilon", format!("{num}/{den} is not in (0, 1)")));
        }

        // Smallest k with 2^k * num >= n * L * den.
        let target = BigUint::from(n) * BigUint::from(max_len) * BigUint::from(den);
        let num = BigUint::from(num);
        let mut reduced_bits = universe_bits;
        for k in 0..=universe_bits {
            if (&num << k as usize) >= target {
                reduced_bits = k;
                break;
            }
        }
        let reduced_bits = reduced_bits.max(len_bits);

        Ok(Params { universe_bits, max_len, epsilon, n, reduced_bits, seed })
    }

    pub fn universe_bits(&self) -> u32 {
        self.universe_bits
    }

    /// `U = 2^w`; may be `2^64`.
    pub fn universe_size(&self) -> u128 {
        1u128 << self.universe_bits
    }

    pub fn max_len(&self) -> u64 {
        self.max_len
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn epsilon_f64(&self) -> f64 {
        *self.epsilon.numer() as f64 / *self.epsilon.denom() as f64
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `lg r`.
    pub fn reduced_bits(&self) -> u32 {
        self.reduced_bits
    }

    /// `r`; may be `2^64`.
    pub fn reduced_size(&self) -> u128 {
        1u128 << self.reduced_bits
    }

    /// `r - 1`, used to reduce modulo `r`.
    pub fn reduced_mask(&self) -> u64 {
        crate::bits::low_mask(self.reduced_bits)
    }

    /// True when `r` was clamped to the universe and hashing loses nothing.
    pub fn exact_mode(&self) -> bool {
        self.reduced_bits == self.universe_bits
    }

    /// `n * L / epsilon` as a float, for reporting.
    pub fn load(&self) -> f64 {
        self.n as f64 * self.max_len as f64 / self.epsilon_f64()
    }

    pub fn with_seed(&self, seed: u64) -> Params {
        Params { seed, ..*self }
    }
}

/// Inclusive interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub a: u64,
    pub b: u64,
}

impl Interval {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidInterval { a, b, reason: "a > b".into() });
        }
        Ok(Interval { a, b })
    }

    /// Single-point interval.
    pub fn point(x: u64) -> Self {
        Interval { a: x, b: x }
    }

    /// Interval of `len >= 1` positions starting at `a`.
    pub fn with_len(a: u64, len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidInterval { a, b: a, reason: "zero length".into() });
        }
        let b = a.checked_add(len - 1).ok_or(Error::InvalidInterval {
            a,
            b: u64::MAX,
            reason: "overflows 64 bits".into(),
        })?;
        Ok(Interval { a, b })
    }

    /// Number of positions, `b - a + 1`. Never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u128 {
        (self.b - self.a) as u128 + 1
    }

    pub fn contains(&self, x: u64) -> bool {
        self.a <= x && x <= self.b
    }

    /// Rejects intervals reaching outside a universe of `bits` bits.
    pub fn check_universe(&self, bits: u32) -> Result<()> {
        if self.a > self.b {
            return Err(Error::InvalidInterval { a: self.a, b: self.b, reason: "a > b".into() });
        }
        if bits < 64 && self.b >> bits != 0 {
            return Err(Error::InvalidInterval {
                a: self.a,
                b: self.b,
                reason: format!("outside the universe 2^{bits}"),
            });
        }
        Ok(())
    }

    /// Rejects intervals of more than `max` positions.
    pub fn check_len(&self, max: u128) -> Result<()> {
        if self.len() > max {
            return Err(Error::IntervalTooLong { a: self.a, b: self.b, len: self.len(), max });
        }
        Ok(())
    }
}

/// Strictly increasing sequence of points below `2^universe_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PointSet {
    pts: Vec<u64>,
}

impl PointSet {
    /// Wraps an already sorted, duplicate-free list.
    pub fn new(pts: Vec<u64>, universe_bits: u32) -> Result<Self> {
        for (i, w) in pts.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::DuplicatePoint(w[0]));
            }
            if w[0] > w[1] {
                return Err(Error::Unsorted(i + 1));
            }
        }
        if let Some(&last) = pts.last() {
            check_point(last, universe_bits)?;
        }
        Ok(PointSet { pts })
    }

    /// Sorts the input; duplicates are rejected rather than merged.
    pub fn from_unsorted(mut pts: Vec<u64>, universe_bits: u32) -> Result<Self> {
        pts.sort_unstable();
        Self::new(pts, universe_bits)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.pts
    }
}

pub(crate) fn check_point(x: u64, universe_bits: u32) -> Result<()> {
    if universe_bits < 64 && x >> universe_bits != 0 {
        return Err(Error::PointOutOfRange { point: x, bits: universe_bits });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eps(num: u64, den: u64) -> Epsilon {
        epsilon(num, den).unwrap()
    }

    #[test]
    fn reduced_universe_examples() {
        let p = Params::new(32, 256, eps(1, 100), 1000, 0).unwrap();
        assert_eq!(p.reduced_size(), 1 << 25);
        assert!(!p.exact_mode());

        let p = Params::new(16, 16, eps(1, 2), 2048, 0).unwrap();
        assert_eq!(p.reduced_size(), 1 << 16);
        assert!(p.exact_mode());

        let p = Params::new(64, 1 << 20, eps(1, 1_000_000), u64::MAX, 0).unwrap();
        assert_eq!(p.reduced_bits(), 64);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(32, 3, eps(1, 100), 10, 0).is_err());
        assert!(Params::new(0, 1, eps(1, 100), 10, 0).is_err());
        assert!(Params::new(65, 1, eps(1, 100), 10, 0).is_err());
        assert!(Params::new(4, 32, eps(1, 100), 10, 0).is_err());
        assert!(epsilon(0, 5).is_err());
        assert!(epsilon(5, 5).is_err());
        assert!(epsilon(1, 0).is_err());
        assert!(epsilon_from_f64(1.5).is_err());
        assert!(epsilon_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn empty_set_is_degenerate_but_valid() {
        let p = Params::new(32, 256, eps(1, 100), 0, 0).unwrap();
        assert_eq!(p.n(), 0);
        assert_eq!(p.reduced_size(), 256);
    }

    #[test]
    fn float_epsilon_conversion() {
        assert_eq!(epsilon_from_f64(0.01).unwrap(), eps(1, 100));
        assert_eq!(epsilon_from_f64(0.25).unwrap(), eps(1, 4));
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::new(vec![1, 2, 3], 2).is_ok());
        assert_eq!(PointSet::new(vec![1, 1], 8), Err(Error::DuplicatePoint(1)));
        assert_eq!(PointSet::new(vec![2, 1], 8), Err(Error::Unsorted(1)));
        assert!(matches!(PointSet::new(vec![4], 2), Err(Error::PointOutOfRange { .. })));
        assert_eq!(PointSet::from_unsorted(vec![9, 2, 5], 4).unwrap().as_slice(), &[2, 5, 9]);
        assert!(PointSet::new(vec![u64::MAX], 64).is_ok());
    }

    #[test]
    fn interval_helpers() {
        assert!(Interval::new(3, 2).is_err());
        let i = Interval::with_len(10, 4).unwrap();
        assert_eq!(i, Interval { a: 10, b: 13 });
        assert_eq!(i.len(), 4);
        assert!(Interval::with_len(u64::MAX, 2).is_err());
        assert_eq!(Interval::new(0, u64::MAX).unwrap().len(), 1u128 << 64);
        assert!(i.check_len(4).is_ok());
        assert!(i.check_len(3).is_err());
        assert!(i.check_universe(4).is_ok());
        assert!(i.check_universe(3).is_err());
    }

    proptest! {
        #[test]
        fn reduced_size_is_tight(w in 1u32..=64, len_bits in 0u32..20, num in 1u64..1000, extra in 1u64..1000, n in 0u64..1_000_000) {
            prop_assume!(len_bits <= w);
            let e = eps(num, num + extra);
            let p = Params::new(w, 1 << len_bits, e, n, 1).unwrap();
            let r = p.reduced_size() as f64;
            let load = n as f64 * (1u64 << len_bits) as f64 * (num + extra) as f64 / num as f64;
            prop_assert!((1u64 << len_bits) as f64 <= r);
            if !p.exact_mode() && n > 0 {
                prop_assert!(r / 2.0 < load * (1.0 + 1e-12));
                prop_assert!(load <= r * (1.0 + 1e-12));
            }
            if p.exact_mode() {
                prop_assert!(load > r / 2.0 || n == 0 || (1u64 << len_bits) as f64 == r);
            }
        }
    }
}
