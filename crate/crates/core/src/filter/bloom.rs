use crate::bits::{mix_seed, splitmix64};
use crate::error::Result;
use crate::hashing::TabulationHash;
use crate::params::{Interval, Params, PointSet};
use crate::rangestruct::Probes;

use super::RangeEmptiness;

/// Point-membership Bloom filter queried once per position of the interval.
///
/// Sized for a per-point false positive rate of `epsilon / (L + 1)`, so a union bound over
/// at most `L` positions keeps the interval rate below `epsilon`.
#[derive(Debug, Clone)]
pub struct BloomBaseline {
    bits: Vec<u64>,
    m: u64,
    k: u32,
    max_len: u64,
    universe_bits: u32,
    hash: TabulationHash,
}

impl BloomBaseline {
    pub fn build(points: &PointSet, params: &Params) -> Self {
        let n = points.len().max(1) as f64;
        let ln2 = std::f64::consts::LN_2;
        let per_point = (params.max_len() as f64 + 1.0) / params.epsilon_f64();
        let m = ((n * per_point.ln()) / (ln2 * ln2)).ceil().max(1.0) as u64;
        let k = ((m as f64 / n) * ln2).round().max(1.0) as u32;
        let mut bloom = BloomBaseline {
            bits: vec![0; m.div_ceil(64) as usize],
            m,
            k,
            max_len: params.max_len(),
            universe_bits: params.universe_bits(),
            hash: TabulationHash::new(mix_seed(params.seed(), 1), u64::MAX),
        };
        for &x in points.as_slice() {
            bloom.insert(x);
        }
        bloom
    }

    fn positions(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        let mut state = self.hash.raw(x);
        // Each position takes the next splitmix64 output, mapped into [m] by multiply-shift.
        (0..self.k).map(move |_| ((splitmix64(&mut state) as u128 * self.m as u128) >> 64) as u64)
    }

    fn insert(&mut self, x: u64) {
        let pos: Vec<u64> = self.positions(x).collect();
        for p in pos {
            self.bits[(p / 64) as usize] |= 1 << (p % 64);
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.positions(x).all(|p| self.bits[(p / 64) as usize] >> (p % 64) & 1 == 1)
    }

    pub fn bit_len(&self) -> u64 {
        self.m
    }

    pub fn hash_count(&self) -> u32 {
        self.k
    }
}

impl RangeEmptiness for BloomBaseline {
    /// Probes every position of the interval; no early exit, so the probe count is `|I|`.
    fn query_counted(&self, interval: Interval, probes: &mut Probes) -> Result<bool> {
        interval.check_universe(self.universe_bits)?;
        interval.check_len(self.max_len as u128)?;
        let mut hit = false;
        for x in interval.a..=interval.b {
            probes.point_probes += 1;
            hit |= self.contains(x);
        }
        Ok(hit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::epsilon;

    #[test]
    fn sizing_follows_the_standard_optimum() {
        let params = Params::new(32, 256, epsilon(1, 100).unwrap(), 1000, 0).unwrap();
        let pts = PointSet::new((0..1000).map(|i| i * 4099).collect(), 32).unwrap();
        let b = BloomBaseline::build(&pts, &params);
        let expect_m = (1000.0 * (257.0f64 / 0.01).ln() / std::f64::consts::LN_2.powi(2)).ceil() as u64;
        assert_eq!(b.bit_len(), expect_m);
        assert_eq!(b.hash_count(), ((expect_m as f64 / 1000.0) * std::f64::consts::LN_2).round() as u32);
    }

    #[test]
    fn members_always_hit_and_probes_equal_length() {
        let params = Params::new(20, 64, epsilon(1, 10).unwrap(), 300, 4).unwrap();
        let pts = PointSet::new((0..300).map(|i| i * 3001 + 7).collect(), 20).unwrap();
        let b = BloomBaseline::build(&pts, &params);
        for &x in pts.as_slice() {
            assert!(b.contains(x));
            let mut probes = Probes::default();
            let i = Interval { a: x.saturating_sub(10), b: x + 20 };
            assert!(b.query_counted(i, &mut probes).unwrap());
            assert_eq!(probes.point_probes as u128, i.len());
        }
        assert!(b.query(Interval { a: 0, b: 64 }).is_err());
    }

    #[test]
    fn interval_false_positive_rate_is_near_epsilon() {
        for (n, limit) in [(1000u64, 0.013), (3, 0.05)] {
            let pts: Vec<u64> = (0..n).map(|i| i * 1_000_003 + 11).collect();
            let params = Params::new(32, 256, epsilon(1, 100).unwrap(), n, 6).unwrap();
            let b = BloomBaseline::build(&PointSet::new(pts.clone(), 32).unwrap(), &params);
            let oracle = crate::rangestruct::SortedOracle::new(pts);
            let r = crate::filter::measure_fpr(&b, &oracle, 32, 0.01, 256, 20_000, 1).unwrap();
            assert!(r.observed_rate <= limit, "n = {n}: rate {}", r.observed_rate);
        }
    }
}
