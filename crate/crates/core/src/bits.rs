//! Fixed-width bit sets over dense node ids.
//!
//! Quorum checks and befouling fixpoints spend most of their time in set
//! intersections over thousands of nodes, so trust sets are kept as packed
//! 64-bit blocks rather than hash sets.

/// A set of indices in `0..len`, packed into 64-bit blocks.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitset {
    len: usize,
    blocks: Vec<u64>,
}

impl Bitset {
    /// Empty set over the universe `0..len`.
    pub fn new(len: usize) -> Self {
        Bitset { len, blocks: vec![0; len.div_ceil(64)] }
    }

    /// Full set over the universe `0..len`.
    pub fn full(len: usize) -> Self {
        let mut s = Bitset::new(len);
        for (i, b) in s.blocks.iter_mut().enumerate() {
            let lo = i * 64;
            *b = if lo + 64 <= len { u64::MAX } else { (1u64 << (len - lo)) - 1 };
        }
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Bitset::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Size of the universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} outside universe 0..{}", self.len);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "index {i} outside universe 0..{}", self.len);
        self.blocks[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.blocks[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_count(&self, other: &Bitset) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &Bitset) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    /// Members of the universe that are not in the set.
    pub fn complement(&self) -> Bitset {
        let mut out = Bitset::full(self.len);
        for (a, b) in out.blocks.iter_mut().zip(&self.blocks) {
            *a &= !b;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(move |(bi, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let tz = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(bi * 64 + tz)
            })
        })
    }
}

impl std::fmt::Debug for Bitset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Bitset {
    /// Collects indices into a set whose universe is just large enough.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let items: Vec<usize> = iter.into_iter().collect();
        let len = items.iter().max().map_or(0, |m| m + 1);
        Bitset::from_indices(len, items)
    }
}
