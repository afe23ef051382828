//! Approximate range emptiness.
//!
//! Store a set `S` of `n` points from `[2^w]` so that a query `[a, b]` of length at most `L`
//! answers "non-empty" whenever `S` meets the interval, and answers "empty" for an empty
//! interval except with probability at most `epsilon`. [`RangeFilter`] does so in about
//! `n lg(L / epsilon)` bits with at most four exact interval probes per query.
//!
//! ```
//! use rangefilter::{epsilon, Interval, Params, PointSet, RangeEmptiness, RangeFilter};
//!
//! let points = PointSet::from_unsorted(vec![40_000, 7, 1_234_567], 32).unwrap();
//! let params = Params::new(32, 256, epsilon(1, 100).unwrap(), 3, 42).unwrap();
//! let filter = RangeFilter::build(&points, params).unwrap();
//! assert!(filter.query(Interval::new(39_990, 40_010).unwrap()).unwrap());
//! ```
//!
//! The crate also contains the pieces the filter is made of (a rank/select bit vector, weak
//! prefix search, an exact succinct range structure), a Bloom-style baseline that probes every
//! position of a query, and a lossless encoder showing how any one-sided filter compresses
//! well-separated point sets.

pub mod bits;
pub mod error;
pub mod filter;
pub mod hashing;
pub mod lowerbound;
pub mod params;
pub mod prefix;
pub mod rangestruct;
pub mod succinct;

pub use bits::{lcp, msb, Prefix};
pub use error::{Error, Result};
pub use filter::{measure_fpr, BloomBaseline, FprReport, RangeEmptiness, RangeFilter, SpaceReport};
pub use hashing::{LocalityHash, TabulationHash};
pub use params::{epsilon, epsilon_from_f64, Epsilon, Interval, Params, PointSet};
pub use prefix::IndexKind;
pub use rangestruct::{BucketedRangeStructure, Probes, SortedOracle};
pub use succinct::BitVector;
