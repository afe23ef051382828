//! The approximate range emptiness filter and the Bloom-style baseline.
//!
//! [`RangeFilter`] maps the point set through the locality-preserving hash into `[r]` and
//! stores the image exactly. A query of length at most `L` becomes at most four interval
//! queries on the image, so it never misses a stored point and reports a false positive only
//! when some point hashes into the image of the query.

mod bloom;
mod format;
mod measure;

pub use bloom::BloomBaseline;
pub use format::{FILE_MAGIC, FILE_VERSION, FLAG_EXACT_MODE, FLAG_ZFAST_INDEX, HEADER_BYTES, TRAILER_BYTES};
pub use measure::{measure_fpr, FprReport, SpaceReport};

use crate::error::{Error, Result};
use crate::hashing::LocalityHash;
use crate::params::{Interval, Params, PointSet};
use crate::prefix::IndexKind;
use crate::rangestruct::{BucketedRangeStructure, Probes};

/// A structure answering "does the stored set intersect this interval?".
pub trait RangeEmptiness {
    /// Answers a query, adding the work done to `probes`.
    fn query_counted(&self, interval: Interval, probes: &mut Probes) -> Result<bool>;

    fn query(&self, interval: Interval) -> Result<bool> {
        self.query_counted(interval, &mut Probes::default())
    }
}

impl RangeEmptiness for BucketedRangeStructure {
    fn query_counted(&self, interval: Interval, probes: &mut Probes) -> Result<bool> {
        BucketedRangeStructure::query_counted(self, interval, probes)
    }
}

#[derive(Debug, Clone)]
pub struct RangeFilter {
    params: Params,
    hash: LocalityHash,
    exact: BucketedRangeStructure,
}

impl RangeFilter {
    pub fn build(points: &PointSet, params: Params) -> Result<Self> {
        Self::build_with_index(points, params, IndexKind::BinarySearch)
    }

    pub fn build_with_index(points: &PointSet, params: Params, kind: IndexKind) -> Result<Self> {
        if points.len() as u64 != params.n() {
            return Err(Error::CountMismatch { expected: params.n(), actual: points.len() as u64 });
        }
        if let Some(&last) = points.as_slice().last() {
            crate::params::check_point(last, params.universe_bits())?;
        }
        let hash = LocalityHash::new(&params);
        let mut image: Vec<u64> = points.as_slice().iter().map(|&x| hash.eval(x)).collect();
        image.sort_unstable();
        image.dedup();
        let exact = BucketedRangeStructure::build(&image, params.reduced_bits(), kind)?;
        Ok(RangeFilter { params, hash, exact })
    }

    pub(crate) fn from_parts(params: Params, exact: BucketedRangeStructure) -> Self {
        RangeFilter { params, hash: LocalityHash::new(&params), exact }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn hash(&self) -> &LocalityHash {
        &self.hash
    }

    /// The exact structure over `h(S)`.
    pub fn exact(&self) -> &BucketedRangeStructure {
        &self.exact
    }

    /// `|h(S)|`.
    pub fn stored_len(&self) -> usize {
        self.exact.len()
    }

    pub fn space_report(&self) -> SpaceReport {
        SpaceReport::of(self)
    }
}

impl RangeEmptiness for RangeFilter {
    fn query_counted(&self, interval: Interval, probes: &mut Probes) -> Result<bool> {
        interval.check_universe(self.params.universe_bits())?;
        interval.check_len(self.params.max_len() as u128)?;
        for part in self.hash.image_of_interval(interval)? {
            if self.exact.query_counted(part, probes)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
