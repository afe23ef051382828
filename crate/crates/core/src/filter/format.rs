//! Binary file format for [`RangeFilter`], little-endian throughout:
//!
//! ```text
//! magic "ARE1" | version u8 | w u8 | flags u8 | reserved u8
//! n u64 | L u64 | eps numerator u64 | eps denominator u64 | r u64 | seed u64 | B u64 | m u64
//! D1 words | D2 words | packed offset words | [u32 length + bytes per non-empty bucket]
//! CRC32 of everything before it, u32
//! ```
//!
//! `r = 2^64` is written as 0. Index blobs are present only when flag bit 1 is set.

use crate::error::{Error, Result};
use crate::params::{epsilon, Params};
use crate::prefix::{IndexKind, ZFastTrie};
use crate::rangestruct::{bucket_bits_for, BucketedRangeStructure};
use crate::succinct::{BitVector, PackedInts};

use super::RangeFilter;

pub const FILE_MAGIC: [u8; 4] = *b"ARE1";
pub const FILE_VERSION: u8 = 1;
pub const FLAG_EXACT_MODE: u8 = 1;
pub const FLAG_ZFAST_INDEX: u8 = 2;
/// Fixed header size in bytes.
pub const HEADER_BYTES: usize = 8 + 8 * 8;
/// Checksum trailer size in bytes.
pub const TRAILER_BYTES: usize = 4;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| Error::decode("truncated filter"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn words(&mut self, count: usize) -> Result<Vec<u64>> {
        let bytes = self.take(count.checked_mul(8).ok_or_else(|| Error::decode("length overflow"))?)?;
        Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn put_words(out: &mut Vec<u8>, words: &[u64]) {
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
}

impl RangeFilter {
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let st = &self.exact;
        let mut out = Vec::with_capacity(HEADER_BYTES + TRAILER_BYTES + st.space().total() as usize / 8);
        out.extend_from_slice(&FILE_MAGIC);
        out.push(FILE_VERSION);
        out.push(p.universe_bits() as u8);
        let mut flags = 0;
        if p.exact_mode() {
            flags |= FLAG_EXACT_MODE;
        }
        if st.index_kind() == IndexKind::ZFast {
            flags |= FLAG_ZFAST_INDEX;
        }
        out.push(flags);
        out.push(0);
        for v in [
            p.n(),
            p.max_len(),
            *p.epsilon().numer(),
            *p.epsilon().denom(),
            p.reduced_size() as u64,
            p.seed(),
            1u64 << st.bucket_bits(),
            st.len() as u64,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        put_words(&mut out, st.d1().words());
        put_words(&mut out, st.d2().words());
        put_words(&mut out, st.offsets().words());
        for blob in st.index_blobs() {
            out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
            out.extend_from_slice(&blob);
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses a complete filter file.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (filter, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(Error::decode("trailing bytes after filter"));
        }
        Ok(filter)
    }

    /// Parses a filter from the front of `bytes`, returning it with the number of bytes used.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != FILE_MAGIC {
            return Err(Error::decode("bad magic"));
        }
        let version = r.u8()?;
        if version != FILE_VERSION {
            return Err(Error::decode(format!("unsupported version {version}")));
        }
        let w = r.u8()? as u32;
        let flags = r.u8()?;
        if flags & !(FLAG_EXACT_MODE | FLAG_ZFAST_INDEX) != 0 || r.u8()? != 0 {
            return Err(Error::decode("unknown flags"));
        }
        let (n, max_len, num, den, r_field, seed, buckets, m) = (r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?);

        let eps = epsilon(num, den).map_err(|e| Error::decode(e.to_string()))?;
        let params = Params::new(w, max_len, eps, n, seed).map_err(|e| Error::decode(e.to_string()))?;
        if params.reduced_size() as u64 != r_field {
            return Err(Error::decode("reduced universe does not match parameters"));
        }
        if (flags & FLAG_EXACT_MODE != 0) != params.exact_mode() {
            return Err(Error::decode("exact-mode flag does not match parameters"));
        }
        if m > n || m > (bytes.len() as u64).saturating_mul(8) {
            return Err(Error::decode("more stored points than inserted points"));
        }
        let m = m as usize;
        let bucket_bits = bucket_bits_for(m, params.reduced_bits());
        if buckets != 1u64 << bucket_bits {
            return Err(Error::decode("bucket count does not match stored point count"));
        }
        let width = params.reduced_bits() - bucket_bits;

        let d1_len = 1usize << bucket_bits;
        let d1 = BitVector::from_words(r.words(d1_len.div_ceil(64))?, d1_len).ok_or_else(|| Error::decode("bad bucket directory"))?;
        let d2_len = d1.count_ones() + m;
        let d2 = BitVector::from_words(r.words(d2_len.div_ceil(64))?, d2_len).ok_or_else(|| Error::decode("bad point directory"))?;
        let offset_words = (m * width as usize).div_ceil(64);
        let offsets = PackedInts::from_words(r.words(offset_words)?, width, m).ok_or_else(|| Error::decode("bad offsets"))?;
        let tail_bits = (m * width as usize) % 64;
        if tail_bits != 0 && offsets.words().last().is_some_and(|w| w >> tail_bits != 0) {
            return Err(Error::decode("nonzero padding in offsets"));
        }

        let tries = if flags & FLAG_ZFAST_INDEX != 0 {
            // Bucket sizes from D2, needed to validate each blob.
            let mut sizes = Vec::with_capacity(d1.count_ones());
            let mut run = None;
            for i in 0..d2.len() {
                if d2.get(i) == Some(true) {
                    if let Some(s) = run {
                        sizes.push(s);
                    }
                    run = Some(0usize);
                } else if let Some(s) = run.as_mut() {
                    *s += 1;
                }
            }
            sizes.extend(run);
            let mut tries = Vec::with_capacity(sizes.len());
            for size in sizes {
                let len = r.u32()? as usize;
                tries.push(ZFastTrie::from_bytes(r.take(len)?, width, size)?);
            }
            Some(tries)
        } else {
            None
        };

        let body_end = r.pos;
        let crc = r.u32()?;
        if crc32fast::hash(&bytes[..body_end]) != crc {
            return Err(Error::decode("checksum mismatch"));
        }
        let exact = BucketedRangeStructure::from_parts(params.reduced_bits(), bucket_bits, d1, d2, offsets, tries)?;
        Ok((RangeFilter::from_parts(params, exact), r.pos))
    }
}
