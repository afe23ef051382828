//! Weak prefix search over a sorted list of fixed-width keys.
//!
//! Given a bit prefix `p`, a weak prefix search returns the rank interval of the keys that
//! start with `p`. When no key starts with `p` the returned interval is arbitrary, so callers
//! inspect the keys it points at before trusting it.

use std::collections::HashMap;
use std::ops::Range;

use crate::bits::{lcp, two_fattest, Prefix};
use crate::error::{Error, Result};

/// Random access to a sorted, duplicate-free sequence of keys.
pub trait SortedKeys {
    fn key_count(&self) -> usize;
    fn key(&self, i: usize) -> u64;
}

impl SortedKeys for [u64] {
    fn key_count(&self) -> usize {
        self.len()
    }

    fn key(&self, i: usize) -> u64 {
        self[i]
    }
}

impl SortedKeys for Vec<u64> {
    fn key_count(&self) -> usize {
        self.len()
    }

    fn key(&self, i: usize) -> u64 {
        self[i]
    }
}

fn partition_point<K: SortedKeys + ?Sized>(keys: &K, mut pred: impl FnMut(u64) -> bool) -> usize {
    let (mut lo, mut hi) = (0, keys.key_count());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(keys.key(mid)) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Which weak prefix search implementation a structure uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub enum IndexKind {
    /// Two binary searches over the keys; needs no extra space.
    #[default]
    BinarySearch,
    /// Compacted trie addressed through a hash map on node handles.
    ZFast,
}

/// Exact answer by two binary searches, for keys of `width` bits.
pub fn binary_search_prefix<K: SortedKeys + ?Sized>(keys: &K, width: u32, p: Prefix) -> Range<usize> {
    let (lo, hi) = p.span(width);
    let start = partition_point(keys, |k| k < lo);
    let end = partition_point(keys, |k| k <= hi);
    start..end
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    /// Length of the longest prefix shared by every key below this node.
    extent: u32,
    lo: u32,
    hi: u32,
    /// First rank of the right subtree; equals `hi` for leaves.
    split: u32,
}

impl Node {
    fn range(&self) -> Range<usize> {
        self.lo as usize..self.hi as usize
    }
}

/// Compacted binary trie over sorted keys, with every non-root node reachable in one hash
/// lookup from its handle: the extent prefix whose length is the number with the most trailing
/// zeros in `(parent extent, extent]`. A lookup walks prefix lengths by fat binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZFastTrie {
    width: u32,
    root: Option<Node>,
    handles: HashMap<(u32, u64), Node>,
}

impl ZFastTrie {
    pub fn build<K: SortedKeys + ?Sized>(keys: &K, width: u32) -> Self {
        let mut trie = ZFastTrie { width, root: None, handles: HashMap::new() };
        if keys.key_count() > 0 {
            trie.insert_subtree(keys, 0, keys.key_count(), None);
        }
        trie
    }

    fn insert_subtree<K: SortedKeys + ?Sized>(&mut self, keys: &K, lo: usize, hi: usize, parent: Option<u32>) {
        let first = keys.key(lo);
        let (extent, split) = if hi - lo == 1 {
            (self.width, hi)
        } else {
            let extent = lcp(first, keys.key(hi - 1), self.width).len;
            let bit = self.width - 1 - extent;
            let mut a = lo;
            let mut b = hi;
            while a < b {
                let mid = a + (b - a) / 2;
                if keys.key(mid) >> bit & 1 == 0 {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            (extent, a)
        };
        let node = Node { extent, lo: lo as u32, hi: hi as u32, split: split as u32 };
        match parent {
            None => self.root = Some(node),
            Some(pe) => {
                let f = two_fattest(pe, extent);
                self.handles.insert((f, Prefix::of(first, self.width, f).bits), node);
            }
        }
        if split < hi {
            self.insert_subtree(keys, lo, split, Some(extent));
            self.insert_subtree(keys, split, hi, Some(extent));
        }
    }

    /// Number of trie nodes.
    pub fn node_count(&self) -> usize {
        self.handles.len() + self.root.is_some() as usize
    }

    /// Weak prefix search; `p.len` must not exceed the key width.
    pub fn weak_prefix(&self, p: Prefix) -> Range<usize> {
        debug_assert!(p.len <= self.width);
        let Some(root) = self.root else {
            return 0..0;
        };
        if root.extent >= p.len {
            return root.range();
        }
        // The sought node's skip interval contains p.len. `anchor` is the deepest node found
        // so far on the path whose extent is shorter than p.
        let mut anchor = root;
        let (mut a, mut b) = (root.extent, p.len);
        while a < b {
            let f = two_fattest(a, b);
            match self.handles.get(&(f, p.truncate(f).bits)) {
                Some(node) if node.extent >= p.len => return node.range(),
                Some(node) => {
                    if node.extent <= a || node.split >= node.hi {
                        // Only reachable for prefixes that match no key.
                        return node.range();
                    }
                    a = node.extent;
                    anchor = *node;
                }
                None => b = f - 1,
            }
        }
        if anchor.split >= anchor.hi {
            return anchor.range();
        }
        let bit = p.bits >> (p.len - 1 - a) & 1;
        if bit == 0 {
            anchor.lo as usize..anchor.split as usize
        } else {
            anchor.split as usize..anchor.hi as usize
        }
    }

    /// Serializes the node table.
    pub fn to_bytes(&self, out: &mut Vec<u8>) {
        let write_node = |out: &mut Vec<u8>, n: &Node| {
            out.push(n.extent as u8);
            out.extend_from_slice(&n.lo.to_le_bytes());
            out.extend_from_slice(&n.hi.to_le_bytes());
            out.extend_from_slice(&n.split.to_le_bytes());
        };
        out.extend_from_slice(&(self.handles.len() as u32).to_le_bytes());
        match &self.root {
            Some(root) => write_node(out, root),
            None => write_node(out, &Node { extent: 0, lo: 0, hi: 0, split: 0 }),
        }
        // Sorted so that equal tries serialize identically.
        let mut entries: Vec<_> = self.handles.iter().collect();
        entries.sort_unstable_by_key(|(k, _)| **k);
        for ((f, bits), node) in entries {
            out.push(*f as u8);
            out.extend_from_slice(&bits.to_le_bytes());
            write_node(out, node);
        }
    }

    /// Parses a node table for a bucket holding `key_count` keys of `width` bits.
    pub fn from_bytes(bytes: &[u8], width: u32, key_count: usize) -> Result<Self> {
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(Error::decode("truncated prefix index"));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap());
        let count = u32_at(take(4)?) as usize;
        // A compacted trie over k keys has 2k - 1 nodes, the root being stored separately.
        if key_count == 0 || count != 2 * key_count - 2 {
            return Err(Error::decode("prefix index size does not match the bucket"));
        }
        let read_node = |b: &[u8]| -> Result<Node> {
            let node = Node { extent: b[0] as u32, lo: u32_at(&b[1..5]), hi: u32_at(&b[5..9]), split: u32_at(&b[9..13]) };
            let ok = node.extent <= width
                && node.lo < node.hi
                && node.hi as usize <= key_count
                && node.lo <= node.split
                && node.split <= node.hi;
            if !ok {
                return Err(Error::decode("inconsistent prefix index node"));
            }
            Ok(node)
        };
        let root = read_node(take(13)?)?;
        if root.lo != 0 || root.hi as usize != key_count {
            return Err(Error::decode("prefix index root does not cover the bucket"));
        }
        let mut handles = HashMap::with_capacity(count.min(bytes.len() / 22));
        for _ in 0..count {
            let f = take(1)?[0] as u32;
            let bits = u64::from_le_bytes(take(8)?.try_into().unwrap());
            let node = read_node(take(13)?)?;
            if f == 0 || f > node.extent || (f < 64 && bits >> f != 0) {
                return Err(Error::decode("inconsistent prefix index handle"));
            }
            handles.insert((f, bits), node);
        }
        if !cur.is_empty() {
            return Err(Error::decode("trailing bytes in prefix index"));
        }
        Ok(ZFastTrie { width, root: Some(root), handles })
    }
}

/// A weak prefix search structure bound to its key width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixIndex {
    BinarySearch { width: u32 },
    ZFast(ZFastTrie),
}

impl PrefixIndex {
    pub fn build<K: SortedKeys + ?Sized>(kind: IndexKind, keys: &K, width: u32) -> Self {
        match kind {
            IndexKind::BinarySearch => PrefixIndex::BinarySearch { width },
            IndexKind::ZFast => PrefixIndex::ZFast(ZFastTrie::build(keys, width)),
        }
    }

    pub fn kind(&self) -> IndexKind {
        match self {
            PrefixIndex::BinarySearch { .. } => IndexKind::BinarySearch,
            PrefixIndex::ZFast(_) => IndexKind::ZFast,
        }
    }

    /// Rank interval of the keys starting with `p`; arbitrary if there are none.
    pub fn weak_prefix<K: SortedKeys + ?Sized>(&self, keys: &K, p: Prefix) -> Range<usize> {
        match self {
            PrefixIndex::BinarySearch { width } => binary_search_prefix(keys, *width, p),
            PrefixIndex::ZFast(trie) => trie.weak_prefix(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn brute(keys: &[u64], width: u32, p: Prefix) -> Range<usize> {
        let hits: Vec<usize> = (0..keys.len()).filter(|&i| p.matches(keys[i], width)).collect();
        match (hits.first(), hits.last()) {
            (Some(&a), Some(&b)) => a..b + 1,
            _ => 0..0,
        }
    }

    fn p(s: &str) -> Prefix {
        Prefix::parse(s).unwrap()
    }

    #[test]
    fn examples() {
        let keys = [2u64, 9, 12, 13];
        for kind in [IndexKind::BinarySearch, IndexKind::ZFast] {
            let idx = PrefixIndex::build(kind, &keys[..], 4);
            assert_eq!(idx.weak_prefix(&keys[..], p("1")), 1..4, "{kind:?}");
            assert_eq!(idx.weak_prefix(&keys[..], p("")), 0..4, "{kind:?}");
            assert_eq!(idx.weak_prefix(&keys[..], p("11")), 2..4, "{kind:?}");
            assert_eq!(idx.weak_prefix(&keys[..], p("0010")), 0..1, "{kind:?}");
        }
    }

    #[test]
    fn zfast_exhaustive_small_widths() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for width in 0..=8u32 {
            for _ in 0..40 {
                let universe = 1u64 << width;
                let mut keys: Vec<u64> = (0..rng.gen_range(1..=universe.min(40))).map(|_| rng.gen_range(0..universe)).collect();
                keys.sort_unstable();
                keys.dedup();
                let trie = ZFastTrie::build(&keys, width);
                assert_eq!(trie.node_count(), 2 * keys.len() - 1);
                for len in 0..=width {
                    for bits in 0..(1u64 << len) {
                        let q = Prefix { len, bits };
                        let expect = brute(&keys, width, q);
                        let got = trie.weak_prefix(q);
                        if !expect.is_empty() {
                            assert_eq!(got, expect, "keys {keys:?} prefix {q}");
                        }
                        assert!(got.end <= keys.len());
                        assert_eq!(binary_search_prefix(&keys[..], width, q).len(), expect.len());
                    }
                }
            }
        }
    }

    #[test]
    fn zfast_serialization_round_trip() {
        let keys: Vec<u64> = vec![3, 17, 18, 200, 4000, 4001, 65535];
        let trie = ZFastTrie::build(&keys, 16);
        let mut bytes = Vec::new();
        trie.to_bytes(&mut bytes);
        assert_eq!(ZFastTrie::from_bytes(&bytes, 16, keys.len()).unwrap(), trie);
        assert!(ZFastTrie::from_bytes(&bytes[..bytes.len() - 1], 16, keys.len()).is_err());
        assert!(ZFastTrie::from_bytes(&bytes, 16, keys.len() - 1).is_err());
    }

    proptest! {
        #[test]
        fn zfast_agrees_on_populated_prefixes(raw in proptest::collection::btree_set(any::<u64>(), 1..200), probe in any::<u64>(), len in 0u32..=64) {
            let keys: Vec<u64> = raw.into_iter().collect();
            let trie = ZFastTrie::build(&keys, 64);
            // Prefixes of stored keys are always populated.
            for &k in keys.iter().take(20) {
                let q = Prefix::of(k, 64, len);
                prop_assert_eq!(trie.weak_prefix(q), binary_search_prefix(&keys[..], 64, q));
            }
            let q = Prefix::of(probe, 64, len);
            let exact = binary_search_prefix(&keys[..], 64, q);
            let got = trie.weak_prefix(q);
            prop_assert!(got.end <= keys.len());
            if !exact.is_empty() {
                prop_assert_eq!(got, exact);
            }
        }
    }
}
