//! Bitmask subsets of a ground set `{0, .., n-1}` with `n <= 64`.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

/// Largest ground set a [`Subset`] can index.
pub const MAX_GROUND: usize = 64;

/// A subset of the ground set, one bit per element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= MAX_GROUND);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1u64 << i)
    }

    /// Builds a subset from element indices; indices must be below 64.
    pub fn from_elems<I: IntoIterator<Item = usize>>(elems: I) -> Subset {
        Subset(elems.into_iter().fold(0u64, |acc, e| acc | (1u64 << e)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn insert(self, i: usize) -> Subset {
        Subset(self.0 | (1u64 << i))
    }

    pub fn remove(self, i: usize) -> Subset {
        Subset(self.0 & !(1u64 << i))
    }

    /// Complement within `{0, .., n-1}`.
    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Subset::full(n).0)
    }

    /// Largest element plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> Elems {
        Elems(self.0)
    }

    /// Image under a permutation given as `perm[i] = image of i`.
    pub fn permute(self, perm: &[usize]) -> Subset {
        Subset::from_elems(self.iter().map(|i| perm[i]))
    }

    /// Canonical ordering key: size first, then numeric value.
    pub fn canonical_key(self) -> (u32, u64) {
        (self.0.count_ones(), self.0)
    }
}

/// Iterator over the elements of a subset in increasing order.
pub struct Elems(u64);

impl Iterator for Elems {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elems {}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for e in self.iter() {
            seq.serialize_element(&e)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SubsetVisitor;

        impl<'de> Visitor<'de> for SubsetVisitor {
            type Value = Subset;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of element indices below 64")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Subset, A::Error> {
                let mut bits = 0u64;
                while let Some(e) = seq.next_element::<u64>()? {
                    if e >= 64 {
                        return Err(de::Error::custom(format!(
                            "element index {e} does not fit a 64-element ground set"
                        )));
                    }
                    if bits >> e & 1 == 1 {
                        return Err(de::Error::custom(format!("element {e} repeated")));
                    }
                    bits |= 1 << e;
                }
                Ok(Subset(bits))
            }
        }

        deserializer.deserialize_seq(SubsetVisitor)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
