//! Growable bitsets over element indices.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const BITS: usize = 64;

/// A finite set of element indices, stored as little-endian 64-bit words.
///
/// Trailing zero words are always trimmed so that equal sets have equal
/// representations. Ordering compares the sets as unsigned integers
/// (bit `i` has weight `2^i`), which is the canonical support order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ElementSubset {
    words: Vec<u64>,
}

impl ElementSubset {
    pub fn empty() -> Self {
        ElementSubset { words: Vec::new() }
    }

    /// All elements `0..n`.
    pub fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n / BITS];
        if !n.is_multiple_of(BITS) {
            words.push((1u64 << (n % BITS)) - 1);
        }
        ElementSubset { words }
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut s = ElementSubset::empty();
        for e in elements {
            s.insert(e);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, e: usize) {
        let w = e / BITS;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (e % BITS);
    }

    pub fn remove(&mut self, e: usize) {
        let w = e / BITS;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (e % BITS));
            self.trim();
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words
            .get(e / BITS)
            .is_some_and(|w| w & (1u64 << (e % BITS)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Largest member, if any.
    pub fn max_element(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * BITS + (BITS - 1 - last.leading_zeros() as usize))
    }

    /// True when every member is `< n`.
    pub fn fits_within(&self, n: usize) -> bool {
        self.max_element().is_none_or(|m| m < n)
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, o) in words.iter_mut().zip(&short.words) {
            *w |= o;
        }
        ElementSubset { words }
    }

    pub fn union_with(&mut self, other: &Self) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = ElementSubset {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        };
        s.trim();
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = ElementSubset {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * BITS + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl Ord for ElementSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for ElementSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElementSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ElementSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ElementSubset::from_elements(iter)
    }
}

/// Serialized as a strictly ascending list of element indices.
impl Serialize for ElementSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for e in self.iter() {
            seq.serialize_element(&e)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ElementSubset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SubsetVisitor;

        impl<'de> Visitor<'de> for SubsetVisitor {
            type Value = ElementSubset;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a strictly ascending list of element indices")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ElementSubset, A::Error> {
                let mut s = ElementSubset::empty();
                let mut prev: Option<usize> = None;
                while let Some(e) = seq.next_element::<usize>()? {
                    if prev.is_some_and(|p| e <= p) {
                        return Err(de::Error::custom(format!(
                            "element list is not strictly ascending at {e}"
                        )));
                    }
                    prev = Some(e);
                    s.insert(e);
                }
                Ok(s)
            }
        }

        deserializer.deserialize_seq(SubsetVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_set_ops() {
        let a = ElementSubset::from_elements([0, 1, 70]);
        let b = ElementSubset::from_elements([1, 2]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 2, 70]);
        assert_eq!(a.intersection(&b).to_vec(), vec![1]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 70]);
        assert_eq!(a.max_element(), Some(70));
        assert!(!a.fits_within(70));
        assert!(a.fits_within(71));
        assert!(ElementSubset::empty().fits_within(0));
        assert_eq!(ElementSubset::full(65).len(), 65);
        let mut c = a.clone();
        c.remove(70);
        assert_eq!(c, ElementSubset::from_elements([0, 1]));
    }

    #[test]
    fn canonical_order_is_integer_order() {
        let e = ElementSubset::empty();
        let s0 = ElementSubset::from_elements([0]);
        let s1 = ElementSubset::from_elements([1]);
        let s01 = ElementSubset::from_elements([0, 1]);
        let big = ElementSubset::from_elements([64]);
        let mut v = vec![big.clone(), s01.clone(), s1.clone(), e.clone(), s0.clone()];
        v.sort();
        assert_eq!(v, vec![e, s0, s1, s01, big]);
    }

    #[test]
    fn json_requires_ascending() {
        let s: ElementSubset = serde_json::from_str("[0, 3]").unwrap();
        assert_eq!(s.to_vec(), vec![0, 3]);
        assert!(serde_json::from_str::<ElementSubset>("[3, 0]").is_err());
        assert!(serde_json::from_str::<ElementSubset>("[1, 1]").is_err());
    }

    proptest! {
        #[test]
        fn ops_agree_with_btreeset(a in proptest::collection::btree_set(0usize..150, 0..20),
                                   b in proptest::collection::btree_set(0usize..150, 0..20)) {
            let sa: ElementSubset = a.iter().copied().collect();
            let sb: ElementSubset = b.iter().copied().collect();
            prop_assert_eq!(sa.union(&sb).to_vec(), a.union(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).to_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa == sb, a == b);
            let json = serde_json::to_string(&sa).unwrap();
            prop_assert_eq!(serde_json::from_str::<ElementSubset>(&json).unwrap(), sa);
        }
    }
}
