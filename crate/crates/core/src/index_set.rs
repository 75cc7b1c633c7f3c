//! Small finite subsets of ℕ (elements below 64) stored as bitmasks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest admissible element (exclusive bound) of an [`IndexSet`].
pub const MAX_INDEX: u32 = 64;

/// A finite set of indices, each below [`MAX_INDEX`], iterated in increasing order.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u64);

impl IndexSet {
    /// The empty set.
    pub const EMPTY: IndexSet = IndexSet(0);

    /// Builds a set from raw bits.
    pub const fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    /// Raw bit representation.
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{1, ..., n}`.
    pub fn range1(n: u32) -> Result<Self> {
        if n >= MAX_INDEX {
            return Err(Error::Malformed(format!(
                "index set [1..{n}] exceeds {}",
                MAX_INDEX - 1
            )));
        }
        Ok(IndexSet(((1u64 << n) - 1) << 1))
    }

    /// Builds a set from a slice, rejecting out-of-range or repeated elements.
    pub fn from_slice(items: &[u32]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in items {
            if i >= MAX_INDEX {
                return Err(Error::Malformed(format!(
                    "index {i} exceeds {}",
                    MAX_INDEX - 1
                )));
            }
            if bits & (1 << i) != 0 {
                return Err(Error::Malformed(format!("index {i} repeated")));
            }
            bits |= 1 << i;
        }
        Ok(IndexSet(bits))
    }

    /// Singleton `{i}`.
    pub fn singleton(i: u32) -> Self {
        debug_assert!(i < MAX_INDEX);
        IndexSet(1 << i)
    }

    /// Number of elements.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True when the set has no elements.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Membership test.
    pub fn contains(self, i: u32) -> bool {
        i < MAX_INDEX && self.0 & (1 << i) != 0
    }

    /// Smallest element.
    pub fn min(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    /// Union.
    pub fn union(self, other: Self) -> Self {
        IndexSet(self.0 | other.0)
    }

    /// Intersection.
    pub fn intersection(self, other: Self) -> Self {
        IndexSet(self.0 & other.0)
    }

    /// Set difference `self ∖ other`.
    pub fn minus(self, other: Self) -> Self {
        IndexSet(self.0 & !other.0)
    }

    /// `self ∖ {i}`.
    pub fn without(self, i: u32) -> Self {
        IndexSet(self.0 & !(1u64 << i))
    }

    /// `self ∪ {i}`.
    pub fn with(self, i: u32) -> Self {
        IndexSet(self.0 | (1u64 << i))
    }

    /// Subset test.
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Position of `i` among the sorted elements.
    pub fn position(self, i: u32) -> Option<usize> {
        self.contains(i)
            .then(|| (self.0 & ((1u64 << i) - 1)).count_ones() as usize)
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = u32> + Clone {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                i
            })
        })
    }

    /// Elements as a sorted vector.
    pub fn to_vec(self) -> Vec<u32> {
        self.iter().collect()
    }

    /// All subsets of `self` (including ∅ and `self`), in increasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let full = self.0;
        let mut sub: u64 = 0;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = IndexSet(sub);
            if sub == full {
                done = true;
            } else {
                sub = (sub.wrapping_sub(full)) & full;
            }
            Some(out)
        })
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        IndexSet::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_iteration() {
        let x = IndexSet::range1(4).unwrap();
        assert_eq!(x.to_vec(), vec![1, 2, 3, 4]);
        assert_eq!(x.len(), 4);
        assert_eq!(x.position(3), Some(2));
        assert_eq!(x.without(2).to_vec(), vec![1, 3, 4]);
    }

    #[test]
    fn subsets_are_exhaustive() {
        let x = IndexSet::from_slice(&[1, 3, 5]).unwrap();
        let subs: Vec<_> = x.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset(x)));
    }

    #[test]
    fn rejects_repeats_and_large_indices() {
        assert!(IndexSet::from_slice(&[1, 1]).is_err());
        assert!(IndexSet::from_slice(&[64]).is_err());
    }
}
