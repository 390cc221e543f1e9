//! Dense bit-vector subsets of a group's element indices.

use std::fmt;

const WORD: usize = 64;

/// A subset of `0..len`, stored one bit per element.
///
/// Masks are the unit of every covering computation: a mask is tied to a
/// group only through its length, which must equal the group order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    len: usize,
    words: Vec<u64>,
}

impl SubsetMask {
    pub fn empty(len: usize) -> Self {
        SubsetMask {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut m = SubsetMask {
            len,
            words: vec![!0; len.div_ceil(WORD)],
        };
        m.trim();
        m
    }

    pub fn singleton(len: usize, i: usize) -> Self {
        let mut m = Self::empty(len);
        m.insert(i);
        m
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut m = Self::empty(len);
        for i in indices {
            m.insert(i);
        }
        m
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Length of the ambient index range (the group order).
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of elements in the subset.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range for mask of length {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range for mask of length {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn union_with(&mut self, other: &SubsetMask) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &SubsetMask) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Removes every element of `other` from `self`.
    pub fn difference_with(&mut self, other: &SubsetMask) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &SubsetMask) -> SubsetMask {
        let mut m = self.clone();
        m.union_with(other);
        m
    }

    pub fn intersection(&self, other: &SubsetMask) -> SubsetMask {
        let mut m = self.clone();
        m.intersect_with(other);
        m
    }

    pub fn difference(&self, other: &SubsetMask) -> SubsetMask {
        let mut m = self.clone();
        m.difference_with(other);
        m
    }

    pub fn complement(&self) -> SubsetMask {
        let mut m = SubsetMask {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        m.trim();
        m
    }

    pub fn is_subset(&self, other: &SubsetMask) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &SubsetMask) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    /// Elements in increasing index order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubsetMask({}/{}) ", self.count(), self.len)?;
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}
