//! Fixed-width bitsets over case indices.

use alloc::vec;
use alloc::vec::Vec;

/// A set of case indices `0..capacity`, stored as packed `u64` words.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CaseSet {
    words: Vec<u64>,
    capacity: usize,
}

impl CaseSet {
    /// The empty set over `capacity` cases.
    pub fn empty(capacity: usize) -> Self {
        CaseSet { words: vec![0; capacity.div_ceil(64)], capacity }
    }

    /// The set `{0, .., capacity - 1}`.
    pub fn full(capacity: usize) -> Self {
        let mut set = Self::empty(capacity);
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        set.trim();
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(capacity: usize, indices: I) -> Self {
        let mut set = Self::empty(capacity);
        for i in indices {
            set.insert(i);
        }
        set
    }

    fn trim(&mut self) {
        let rem = self.capacity % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Number of cases the set ranges over.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// # Panics
    /// If `index >= capacity`.
    pub fn insert(&mut self, index: usize) {
        assert!(index < self.capacity, "case index {index} out of range");
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.capacity {
            self.words[index / 64] &= !(1 << (index % 64));
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.capacity && self.words[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self ∩ other`.
    pub fn intersection(&self, other: &CaseSet) -> CaseSet {
        debug_assert_eq!(self.capacity, other.capacity);
        CaseSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(), capacity: self.capacity }
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &CaseSet) -> CaseSet {
        debug_assert_eq!(self.capacity, other.capacity);
        CaseSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(), capacity: self.capacity }
    }

    pub fn union_with(&mut self, other: &CaseSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &CaseSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_len(&self, other: &CaseSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// `|self ∖ other|` without allocating.
    pub fn difference_len(&self, other: &CaseSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & !b).count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &CaseSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}
