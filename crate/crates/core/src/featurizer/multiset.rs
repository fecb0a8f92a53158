//! Multisets with min/sum/max semantics.

use std::hash::Hash;

use rustc_hash::FxHashMap;

#[derive(Debug, Clone)]
pub struct Multiset<T: Hash + Eq> {
    counts: FxHashMap<T, u32>,
    total: u64,
}

impl<T: Hash + Eq> Default for Multiset<T> {
    fn default() -> Self {
        Self { counts: FxHashMap::default(), total: 0 }
    }
}

impl<T: Hash + Eq> PartialEq for Multiset<T> {
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total && self.counts == other.counts
    }
}

impl<T: Hash + Eq> Eq for Multiset<T> {}

impl<T: Hash + Eq + Copy> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Self::new();
        for x in iter {
            m.insert(x, 1);
        }
        m
    }
}

impl<T: Hash + Eq + Copy> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: T, n: u32) {
        if n == 0 {
            return;
        }
        *self.counts.entry(x).or_insert(0) += n;
        self.total += n as u64;
    }

    pub fn count(&self, x: &T) -> u32 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    /// Total multiplicity `|X|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct elements `|S(X)|`.
    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, u32)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    pub fn support(&self) -> impl Iterator<Item = T> + '_ {
        self.counts.keys().copied()
    }

    /// `self ⊎ other`: multiplicities add.
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_all(other);
        out
    }

    pub fn add_all(&mut self, other: &Self) {
        for (x, n) in other.iter() {
            self.insert(x, n);
        }
    }

    /// `self ∪ other`: the larger multiplicity wins.
    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, n) in other.iter() {
            let c = out.counts.entry(x).or_insert(0);
            if n > *c {
                out.total += (n - *c) as u64;
                *c = n;
            }
        }
        out
    }

    /// `self ∩ other`: the smaller multiplicity wins.
    pub fn intersection(&self, other: &Self) -> Self {
        let (small, large) = if self.counts.len() <= other.counts.len() { (self, other) } else { (other, self) };
        let mut out = Self::new();
        for (x, n) in small.iter() {
            out.insert(x, n.min(large.count(&x)));
        }
        out
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_size(&self, other: &Self) -> u64 {
        let (small, large) = if self.counts.len() <= other.counts.len() { (self, other) } else { (other, self) };
        small.iter().map(|(x, n)| n.min(large.count(&x)) as u64).sum()
    }
}

/// `Σ_f min(mult_A(f), mult_B(f))`.
pub fn sim_score<T: Hash + Eq + Copy>(a: &Multiset<T>, b: &Multiset<T>) -> u64 {
    a.intersection_size(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(items: &[(char, u32)]) -> Multiset<char> {
        let mut m = Multiset::new();
        for &(c, n) in items {
            m.insert(c, n);
        }
        m
    }

    #[test]
    fn sim_score_examples() {
        let x = ms(&[('a', 2), ('b', 1)]);
        assert_eq!(sim_score(&x, &x), 3);
        assert_eq!(sim_score(&x, &ms(&[('c', 4)])), 0);
        assert_eq!(sim_score(&x, &ms(&[('a', 1), ('b', 3)])), 2);
    }

    #[test]
    fn union_sum_intersection() {
        let a = ms(&[('a', 2), ('b', 1)]);
        let b = ms(&[('a', 1), ('c', 3)]);
        assert_eq!(a.sum(&b), ms(&[('a', 3), ('b', 1), ('c', 3)]));
        assert_eq!(a.union(&b), ms(&[('a', 2), ('b', 1), ('c', 3)]));
        assert_eq!(a.intersection(&b), ms(&[('a', 1)]));
        assert_eq!(a.union(&b).total(), 6);
        assert_eq!(a.support_len(), 2);
    }

    proptest! {
        #[test]
        fn intersection_size_matches_materialized(
            xs in proptest::collection::vec(0u8..6, 0..30),
            ys in proptest::collection::vec(0u8..6, 0..30),
        ) {
            let a: Multiset<u8> = xs.into_iter().collect();
            let b: Multiset<u8> = ys.into_iter().collect();
            let i = a.intersection(&b);
            prop_assert_eq!(i.total(), sim_score(&a, &b));
            prop_assert!(i.total() <= a.total().min(b.total()));
            prop_assert_eq!(a.sum(&b).total(), a.total() + b.total());
            prop_assert!(a.union(&b).total() >= a.total().max(b.total()));
        }
    }
}
