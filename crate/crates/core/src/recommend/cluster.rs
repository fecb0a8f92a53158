//! Valid cluster tuples over the reranked list.

use std::hash::Hash;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::featurizer::Multiset;

/// A strictly increasing index tuple into `N₂` with its commonality scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTuple {
    pub indices: Vec<usize>,
    /// `|∩ F(N₂(i))|`.
    pub cs: u64,
    /// `|∩ F(Prune(F(q), N₂(i)))|`.
    pub csq: u64,
    /// `cs / csq`.
    pub l: f64,
    /// `csq / |F(Prune(F(q), N₂(i₁)))|`.
    pub s: f64,
}

/// Feature multisets of the cluster candidates: full `F(N₂(i))` and pruned
/// `F(Prune(F(q), N₂(i)))`.
pub struct Members<'a, T: Hash + Eq> {
    pub full: &'a [Multiset<T>],
    pub pruned: &'a [Multiset<T>],
}

#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub tau2: f64,
    pub tau3: f64,
}

impl Thresholds {
    /// `cs/csq > τ₂` and `csq/first > τ₃`.
    pub fn valid(&self, cs: u64, csq: u64, first: u64) -> bool {
        csq > 0 && first > 0 && cs as f64 / csq as f64 > self.tau2 && csq as f64 / first as f64 > self.tau3
    }
}

fn tuple(indices: Vec<usize>, cs: u64, csq: u64, first: u64) -> ClusterTuple {
    ClusterTuple { indices, cs, csq, l: cs as f64 / csq as f64, s: csq as f64 / first as f64 }
}

/// Scores an arbitrary tuple from scratch.
pub fn score_tuple<T: Hash + Eq + Copy>(m: &Members<T>, indices: &[usize]) -> (u64, u64) {
    let mut full = m.full[indices[0]].clone();
    let mut pruned = m.pruned[indices[0]].clone();
    for &i in &indices[1..] {
        full = full.intersection(&m.full[i]);
        pruned = pruned.intersection(&m.pruned[i]);
    }
    (full.total(), pruned.total())
}

struct Grown<T: Hash + Eq> {
    tuple: ClusterTuple,
    full: Multiset<T>,
    pruned: Multiset<T>,
}

/// `l(a) > l(b)` for ratios `cs/csq`, compared exactly.
fn l_greater(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0 as u128) * (b.1 as u128) > (b.0 as u128) * (a.1 as u128)
}

/// `𝒞`: valid singletons, then repeatedly each tuple extended by the later
/// index whose valid extension has the largest `l` (smallest index on ties),
/// until no new tuple appears. Tuples are returned in discovery order.
pub fn grow_clusters<T: Hash + Eq + Copy>(m: &Members<T>, th: Thresholds) -> Vec<ClusterTuple> {
    let n = m.full.len();
    let mut seen: FxHashSet<Vec<usize>> = FxHashSet::default();
    let mut out = Vec::new();
    let mut frontier: Vec<Grown<T>> = Vec::new();
    for i in 0..n {
        let first = m.pruned[i].total();
        let (cs, csq) = (m.full[i].total(), m.pruned[i].total());
        if th.valid(cs, csq, first) {
            let t = tuple(vec![i], cs, csq, first);
            seen.insert(t.indices.clone());
            frontier.push(Grown { tuple: t, full: m.full[i].clone(), pruned: m.pruned[i].clone() });
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            let first = m.pruned[g.tuple.indices[0]].total();
            let last = *g.tuple.indices.last().unwrap();
            let mut best: Option<(usize, u64, u64)> = None;
            for j in last + 1..n {
                let csq = g.pruned.intersection_size(&m.pruned[j]);
                let cs = g.full.intersection_size(&m.full[j]);
                if th.valid(cs, csq, first) && best.is_none_or(|(_, bcs, bcsq)| l_greater((cs, csq), (bcs, bcsq))) {
                    best = Some((j, cs, csq));
                }
            }
            if let Some((j, cs, csq)) = best {
                let mut indices = g.tuple.indices.clone();
                indices.push(j);
                if seen.insert(indices.clone()) {
                    next.push(Grown {
                        tuple: tuple(indices, cs, csq, first),
                        full: g.full.intersection(&m.full[j]),
                        pruned: g.pruned.intersection(&m.pruned[j]),
                    });
                }
            }
        }
        out.extend(std::mem::replace(&mut frontier, next).into_iter().map(|g| g.tuple));
    }
    out
}

/// Jaccard similarity of the index sets.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Sorts by first index ascending, then length descending (then indices), and
/// drops every tuple whose Jaccard similarity with an earlier kept tuple
/// exceeds 0.5.
pub fn dedup_sort(mut tuples: Vec<ClusterTuple>) -> Vec<ClusterTuple> {
    tuples.sort_by(|a, b| {
        a.indices[0]
            .cmp(&b.indices[0])
            .then(b.indices.len().cmp(&a.indices.len()))
            .then(a.indices.cmp(&b.indices))
    });
    let mut kept: Vec<ClusterTuple> = Vec::new();
    for t in tuples {
        if kept.iter().all(|k| jaccard(&k.indices, &t.indices) <= 0.5) {
            kept.push(t);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(indices: &[usize]) -> ClusterTuple {
        ClusterTuple { indices: indices.to_vec(), cs: 0, csq: 0, l: 0.0, s: 0.0 }
    }

    fn order(v: &[ClusterTuple]) -> Vec<Vec<usize>> {
        v.iter().map(|t| t.indices.clone()).collect()
    }

    #[test]
    fn dedup_examples() {
        assert_eq!(order(&dedup_sort(vec![t(&[1, 2]), t(&[1, 2, 3])])), vec![vec![1, 2, 3]]);
        assert_eq!(order(&dedup_sort(vec![t(&[5, 6]), t(&[1, 2])])), vec![vec![1, 2], vec![5, 6]]);
        assert_eq!(
            order(&dedup_sort(vec![t(&[4]), t(&[2, 9]), t(&[1, 2, 3])])),
            vec![vec![1, 2, 3], vec![2, 9], vec![4]]
        );
    }

    fn ms(items: &[u8]) -> Multiset<u8> {
        items.iter().copied().collect()
    }

    #[test]
    fn near_duplicates_cluster_and_outlier_stays_alone() {
        let base: Vec<u8> = (0..20).collect();
        let mut other = base.clone();
        other[19] = 99;
        let full = vec![ms(&base), ms(&other), ms(&(100..130).collect::<Vec<u8>>())];
        let pruned = vec![ms(&base[..5]), ms(&other[..5]), ms(&[100, 101, 102, 103, 104])];
        let th = Thresholds { tau2: 1.5, tau3: 0.9 };
        let c = grow_clusters(&Members { full: &full, pruned: &pruned }, th);
        assert_eq!(order(&c), vec![vec![0], vec![1], vec![2], vec![0, 1]]);
        assert_eq!((c[3].cs, c[3].csq), (19, 5));
    }

    #[test]
    fn identical_copies_form_one_maximal_tuple() {
        let full: Vec<_> = (0..4).map(|_| ms(&(0..10).collect::<Vec<u8>>())).collect();
        let pruned: Vec<_> = (0..4).map(|_| ms(&[0, 1, 2])).collect();
        let th = Thresholds { tau2: 1.5, tau3: 0.9 };
        let c = grow_clusters(&Members { full: &full, pruned: &pruned }, th);
        assert!(c.iter().any(|t| t.indices == vec![0, 1, 2, 3]));
        assert_eq!(order(&dedup_sort(c))[0], vec![0, 1, 2, 3]);
    }
}
