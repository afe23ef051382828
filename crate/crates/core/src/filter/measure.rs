use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::mix_seed;
use crate::error::{Error, Result};
use crate::params::Interval;
use crate::rangestruct::{Probes, SortedOracle};

use super::format::{HEADER_BYTES, TRAILER_BYTES};
use super::{RangeEmptiness, RangeFilter};

const SAMPLE_ATTEMPTS: usize = 10_000;

/// Outcome of a false positive measurement over random empty intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FprReport {
    pub trials: u64,
    pub false_positives: u64,
    pub observed_rate: f64,
    pub standard_error: f64,
    pub epsilon: f64,
    pub len: u64,
    pub mean_range_queries: f64,
    pub max_range_queries: u64,
    pub mean_point_probes: f64,
    pub max_point_probes: u64,
}

/// Samples `trials` uniformly random intervals of `len` positions that miss every point of
/// `oracle`, and counts how often `structure` answers non-empty.
///
/// Trial `t` draws from a generator seeded by `(seed, t)`, so the report does not depend on how
/// the trials are scheduled across threads.
pub fn measure_fpr<S: RangeEmptiness + Sync>(
    structure: &S,
    oracle: &SortedOracle,
    universe_bits: u32,
    epsilon: f64,
    len: u64,
    trials: u64,
    seed: u64,
) -> Result<FprReport> {
    if len == 0 || (universe_bits < 64 && len as u128 > 1u128 << universe_bits) {
        return Err(Error::param("len", format!("{len} does not fit the universe")));
    }
    let last_start = (crate::bits::low_mask(universe_bits) as u128 + 1 - len as u128) as u64;
    let outcomes: Vec<(bool, Probes)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rand::rngs::StdRng::seed_from_u64(mix_seed(seed, t));
            for _ in 0..SAMPLE_ATTEMPTS {
                let a = rng.gen_range(0..=last_start);
                let i = Interval { a, b: a + (len - 1) };
                if oracle.query(i) {
                    continue;
                }
                let mut probes = Probes::default();
                let hit = structure.query_counted(i, &mut probes)?;
                return Ok((hit, probes));
            }
            Err(Error::RetryExhausted { what: "an empty interval", attempts: SAMPLE_ATTEMPTS })
        })
        .collect::<Result<_>>()?;

    let false_positives = outcomes.iter().filter(|(hit, _)| *hit).count() as u64;
    let rate = if trials == 0 { 0.0 } else { false_positives as f64 / trials as f64 };
    let (mut total, mut max) = (Probes::default(), Probes::default());
    for (_, p) in &outcomes {
        total += *p;
        max.range_queries = max.range_queries.max(p.range_queries);
        max.point_probes = max.point_probes.max(p.point_probes);
    }
    let denom = trials.max(1) as f64;
    Ok(FprReport {
        trials,
        false_positives,
        observed_rate: rate,
        standard_error: (rate * (1.0 - rate) / denom).sqrt(),
        epsilon,
        len,
        mean_range_queries: total.range_queries as f64 / denom,
        max_range_queries: max.range_queries,
        mean_point_probes: total.point_probes as f64 / denom,
        max_point_probes: max.point_probes,
    })
}

/// Bit accounting of a serialized [`RangeFilter`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceReport {
    /// Size of the serialized filter, `s`.
    pub total_bits: u64,
    pub header_bits: u64,
    pub offsets_bits: u64,
    pub d1_bits: u64,
    pub d2_bits: u64,
    pub index_bits: u64,
    /// `n * lg(L / epsilon)`.
    pub bound_bits: f64,
    /// `(total - header) / bound`.
    pub ratio: f64,
    /// `offsets / bound`.
    pub offsets_ratio: f64,
    pub offset_width: u32,
    pub buckets: u64,
    pub stored_points: u64,
    /// Rank/select directories rebuilt on load; not part of the file.
    pub in_memory_directory_bits: u64,
}

impl SpaceReport {
    pub fn of(filter: &RangeFilter) -> Self {
        let st = filter.exact().space();
        let header_bits = 8 * (HEADER_BYTES + TRAILER_BYTES) as u64;
        let total_bits = header_bits + st.total();
        let p = filter.params();
        let bound_bits = p.n() as f64 * (p.max_len() as f64 / p.epsilon_f64()).log2();
        let ratio_of = |v: u64| if bound_bits > 0.0 { v as f64 / bound_bits } else { 0.0 };
        let exact = filter.exact();
        SpaceReport {
            total_bits,
            header_bits,
            offsets_bits: st.offsets,
            d1_bits: st.d1,
            d2_bits: st.d2,
            index_bits: st.index,
            bound_bits,
            ratio: ratio_of(total_bits - header_bits),
            offsets_ratio: ratio_of(st.offsets),
            offset_width: exact.offset_width(),
            buckets: 1 << exact.bucket_bits(),
            stored_points: exact.len() as u64,
            in_memory_directory_bits: (exact.d1().directory_bits() + exact.d2().directory_bits()) as u64,
        }
    }

    pub fn breakdown_sum(&self) -> u64 {
        self.header_bits + self.offsets_bits + self.d1_bits + self.d2_bits + self.index_bits
    }
}
