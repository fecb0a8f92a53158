//! Phase II: greedy pruning of candidates against a target and reranking.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::featurizer::{featurize_tree, Feature, Multiset, Overlay, Symbols, TreeFeatures};
use crate::frontend::{AnnotatedTree, LeafId};
use crate::index::CorpusIndex;
use crate::search::RankedCandidate;

/// Result of pruning one tree: the retained leaves `R`, `F = ⊎_{n∈R} F(n)` and
/// `SimScore(target, F)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    /// Retained leaves in source order.
    pub retained: Vec<LeafId>,
    pub features: Multiset<Feature>,
    pub score: u64,
}

impl Pruned {
    pub fn contains(&self, leaf: LeafId) -> bool {
        self.retained.binary_search(&leaf).is_ok()
    }
}

/// Gain of adding a leaf: how many of its features still fill a deficit.
fn gain(features: &[Feature], deficit: &FxHashMap<Feature, u32>) -> u64 {
    let mut g = 0;
    for (k, f) in features.iter().enumerate() {
        let Some(&d) = deficit.get(f) else { continue };
        // Earlier copies of the same feature in this leaf consume deficit first.
        let before = features[..k].iter().filter(|x| *x == f).count() as u32;
        if before < d {
            g += 1;
        }
    }
    g
}

/// Greedily grows `R` among `leaves` (all leaves when `None`), each step adding
/// the leaf with the largest strict gain in `SimScore(target, F ⊎ F(n))`;
/// ties go to the earliest leaf.
///
/// Gains only shrink as `F` grows, so stale gains are upper bounds and a lazy
/// priority queue selects the same leaf as a full rescan.
pub fn prune(target: &Multiset<Feature>, features: &TreeFeatures, leaves: Option<&[LeafId]>) -> Pruned {
    let mut deficit: FxHashMap<Feature, u32> = target.iter().collect();
    let all: Vec<LeafId>;
    let leaves = match leaves {
        Some(l) => l,
        None => {
            all = (0..features.leaf_count() as LeafId).collect();
            &all
        }
    };
    let mut heap: BinaryHeap<(u64, Reverse<LeafId>)> =
        leaves.iter().map(|&l| (gain(features.leaf(l), &deficit), Reverse(l))).filter(|(g, _)| *g > 0).collect();
    let mut retained = Vec::new();
    let mut acc = Multiset::new();
    let mut score = 0;
    while let Some((bound, Reverse(leaf))) = heap.pop() {
        let g = gain(features.leaf(leaf), &deficit);
        if g < bound {
            if g > 0 {
                heap.push((g, Reverse(leaf)));
            }
            continue;
        }
        for f in features.leaf(leaf) {
            if let Some(d) = deficit.get_mut(f) {
                *d = d.saturating_sub(1);
            }
            acc.insert(*f, 1);
        }
        score += g;
        retained.push(leaf);
    }
    retained.sort_unstable();
    Pruned { retained, features: acc, score }
}

/// A corpus method re-parsed and featurized for Phases II and III.
#[derive(Debug, Clone)]
pub struct LoadedMethod {
    pub id: u32,
    pub tree: AnnotatedTree,
    pub features: TreeFeatures,
    /// `F(m)`.
    pub multiset: Multiset<Feature>,
}

/// Parses and featurizes the given methods in parallel. Symbols unknown to the
/// index get private ids from a copy of `syms`, so they never collide with the
/// query's.
pub fn load_methods(index: &CorpusIndex, ids: &[u32], syms: &Overlay) -> Vec<Option<Arc<LoadedMethod>>> {
    ids.par_iter()
        .map_init(|| syms.clone(), |ov, &id| load_method(index, id, ov).map(Arc::new))
        .collect()
}

fn load_method(index: &CorpusIndex, id: u32, syms: &mut dyn Symbols) -> Option<LoadedMethod> {
    let tree = index.parse_method(id as usize).ok()?;
    let features = featurize_tree(&tree, syms);
    let multiset = features.multiset();
    Some(LoadedMethod { id, tree, features, multiset })
}

/// Every method of an index, loaded once. Corpus methods only use symbols of
/// the index table, so cached features agree with any query overlay.
#[derive(Debug, Clone)]
pub struct MethodCache {
    methods: Vec<Option<Arc<LoadedMethod>>>,
}

impl MethodCache {
    pub fn build(index: &CorpusIndex) -> Self {
        let ids: Vec<u32> = (0..index.len() as u32).collect();
        Self { methods: load_methods(index, &ids, &Overlay::new(index.symbols())) }
    }

    pub fn get(&self, ids: &[u32]) -> Vec<Option<Arc<LoadedMethod>>> {
        ids.iter().map(|&i| self.methods.get(i as usize).cloned().flatten()).collect()
    }
}

/// One entry of `N₂`.
#[derive(Debug, Clone)]
pub struct Reranked {
    pub method: Arc<LoadedMethod>,
    /// 0-based position in the Phase I list.
    pub phase1_rank: usize,
    pub overlap: u32,
    /// `Prune(F(q), m)`.
    pub pruned: Pruned,
    /// `SimScore(F(q), F(pruned))`.
    pub similarity: u64,
    /// `similarity / |F(q)|`.
    pub normalized: f64,
}

/// Prunes every candidate against `query` and orders by similarity, ties by
/// Phase I rank.
pub fn rerank(index: &CorpusIndex, query: &Multiset<Feature>, candidates: &[RankedCandidate], syms: &Overlay) -> Vec<Reranked> {
    let ids: Vec<u32> = candidates.iter().map(|c| c.method).collect();
    rerank_loaded(query, candidates, load_methods(index, &ids, syms))
}

/// [`rerank`] over methods already loaded, one slot per candidate.
pub fn rerank_loaded(query: &Multiset<Feature>, candidates: &[RankedCandidate], loaded: Vec<Option<Arc<LoadedMethod>>>) -> Vec<Reranked> {
    let total = query.total().max(1) as f64;
    let mut out: Vec<Reranked> = loaded
        .into_par_iter()
        .enumerate()
        .filter_map(|(rank, m)| {
            let m = m?;
            let pruned = prune(query, &m.features, None);
            let similarity = pruned.score;
            Some(Reranked {
                method: m,
                phase1_rank: rank,
                overlap: candidates[rank].score,
                pruned,
                similarity,
                normalized: similarity as f64 / total,
            })
        })
        .collect();
    out.sort_by(|a, b| b.similarity.cmp(&a.similarity).then(a.phase1_rank.cmp(&b.phase1_rank)));
    out
}
