//! Phase I overlap search and the TF-IDF baselines.

use std::cmp::Ordering;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurizer::{Feature, Multiset, Overlay, Symbols};
use crate::frontend::AnnotatedTree;
use crate::index::{CorpusIndex, Csr, TfIdf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("query has no features")]
    EmptyQuery,
}

/// The query side of a search, resolved against one index.
#[derive(Debug, Clone)]
pub struct QueryVector {
    /// Known feature columns with query counts, sorted by column.
    pub features: Vec<(u32, u32)>,
    /// `|S(F(q))|`, including features unknown to the index.
    pub support: usize,
    /// Known word columns with query counts, sorted by column.
    pub words: Vec<(u32, u32)>,
    pub word_total: usize,
}

impl QueryVector {
    /// `features` must use symbols from `syms`, an overlay of the index table.
    pub fn new(index: &CorpusIndex, features: &Multiset<Feature>, tree: &AnnotatedTree, syms: &mut Overlay) -> Self {
        let mut cols: Vec<(u32, u32)> = features.iter().filter_map(|(f, n)| Some((index.feature_id(&f)?, n))).collect();
        cols.sort_unstable();
        let mut wc: FxHashMap<u32, u32> = FxHashMap::default();
        for leaf in tree.tree.leaves() {
            let s = syms.intern(&leaf.text);
            if syms.is_base(s) {
                *wc.entry(s).or_insert(0) += 1;
            }
        }
        let mut words: Vec<_> = wc.into_iter().collect();
        words.sort_unstable();
        Self { features: cols, support: features.support_len(), words, word_total: tree.tree.leaf_count() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub method: u32,
    /// `|S(F(m)) ∩ S(F(q))|`.
    pub score: u32,
    /// `score / |S(F(q))|`.
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredMethod {
    pub method: u32,
    pub score: f64,
}

/// Rows per parallel work unit.
const ROW_CHUNK: usize = 4096;

/// `D · v_q` with binary entries; the top `eta1` nonzero rows by score, ties by
/// ascending method id.
pub fn overlap_search(index: &CorpusIndex, q: &QueryVector, eta1: usize) -> Result<Vec<RankedCandidate>, SearchError> {
    if q.support == 0 {
        return Err(SearchError::EmptyQuery);
    }
    let mut bits = vec![0u64; index.feature_count().div_ceil(64)];
    for &(c, _) in &q.features {
        bits[c as usize / 64] |= 1 << (c % 64);
    }
    let m = index.matrix();
    let scores = scan_rows(m, |cols, _| {
        cols.iter().filter(|&&c| bits[c as usize / 64] >> (c % 64) & 1 == 1).count() as f64
    });
    let top = top_n(scores, eta1);
    Ok(top
        .into_iter()
        .map(|s| RankedCandidate { method: s.method, score: s.score as u32, normalized: s.score / q.support as f64 })
        .collect())
}

/// Cosine similarity of `(1 + ln tf) · ln(J/df)` vectors over structural
/// features.
pub fn tfidf_feature_search(index: &CorpusIndex, q: &QueryVector, n: usize) -> Result<Vec<ScoredMethod>, SearchError> {
    if q.support == 0 {
        return Err(SearchError::EmptyQuery);
    }
    Ok(cosine_search(index.matrix(), index.feature_tfidf(), &q.features, n))
}

/// Cosine similarity of TF-IDF vectors over token words.
pub fn tfidf_keyword_search(index: &CorpusIndex, q: &QueryVector, n: usize) -> Result<Vec<ScoredMethod>, SearchError> {
    if q.word_total == 0 {
        return Err(SearchError::EmptyQuery);
    }
    Ok(cosine_search(index.words(), index.word_tfidf(), &q.words, n))
}

fn cosine_search(m: &Csr, t: &TfIdf, query: &[(u32, u32)], n: usize) -> Vec<ScoredMethod> {
    let weights: FxHashMap<u32, f64> = query.iter().map(|&(c, tf)| (c, t.weight(c, tf))).collect();
    let qnorm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
    if qnorm == 0.0 {
        return Vec::new();
    }
    let scores = scan_rows(m, |cols, vals| {
        let mut dot = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if let Some(w) = weights.get(&c) {
                dot += w * t.weight(c, v);
            }
        }
        dot
    });
    let scores = scores
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let norm = t.norms[i];
            if s == 0.0 || norm == 0.0 {
                0.0
            } else {
                s / (qnorm * norm)
            }
        })
        .collect();
    top_n(scores, n)
}

fn scan_rows(m: &Csr, score: impl Fn(&[u32], &[u32]) -> f64 + Sync) -> Vec<f64> {
    let mut out = vec![0.0; m.rows()];
    out.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(chunk, slots)| {
        for (k, slot) in slots.iter_mut().enumerate() {
            let (cols, vals) = m.row(chunk * ROW_CHUNK + k);
            *slot = score(cols, vals);
        }
    });
    out
}

fn rank_order(a: &ScoredMethod, b: &ScoredMethod) -> Ordering {
    b.score.total_cmp(&a.score).then(a.method.cmp(&b.method))
}

/// Nonzero scores, best `n` first.
fn top_n(scores: Vec<f64>, n: usize) -> Vec<ScoredMethod> {
    let mut v: Vec<ScoredMethod> = scores
        .into_iter()
        .enumerate()
        .filter(|(_, s)| *s > 0.0)
        .map(|(i, s)| ScoredMethod { method: i as u32, score: s })
        .collect();
    if n == 0 {
        return Vec::new();
    }
    if v.len() > n {
        v.select_nth_unstable_by(n - 1, rank_order);
        v.truncate(n);
    }
    v.sort_unstable_by(rank_order);
    v
}
