//! Phase III: clustering, intersection and the full recommendation pipeline.

pub mod cluster;
pub mod render;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{EngineConfig, UnionMode};
use crate::featurizer::{featurize_tree, Feature, Multiset, Overlay};
use crate::frontend::{parse_query, AnnotatedTree, FrontendError, LeafId};
use crate::index::CorpusIndex;
use crate::rerank::{prune, rerank, Reranked};
use crate::search::{overlap_search, QueryVector, RankedCandidate, SearchError};
pub use cluster::{dedup_sort, grow_clusters, jaccard, score_tuple, ClusterTuple, Members, Thresholds};
pub use render::{apply_markup, Highlight, Markup, Reduced, RenderOptions, PLACEHOLDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecommendError {
    #[error(transparent)]
    Parse(#[from] FrontendError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("no indexed method shares a feature with the query")]
    NoResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRef {
    pub id: u32,
    pub project: String,
    pub path: String,
    pub name: String,
    pub line: u32,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub cs: u64,
    pub csq: u64,
    pub l: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub rank: usize,
    pub snippet: String,
    /// Tokens not matched by the query, as byte ranges of `snippet`.
    pub highlights: Vec<Highlight>,
    pub methods: Vec<MethodRef>,
    pub cluster_size: usize,
    /// Indices into the reranked list.
    pub tuple: Vec<usize>,
    pub scores: Scores,
}

/// Every intermediate result of one query.
#[derive(Debug, Clone)]
pub struct Trace {
    pub query: AnnotatedTree,
    /// `F(q)`.
    pub features: Multiset<Feature>,
    pub phase1: Vec<RankedCandidate>,
    /// The full reranked list.
    pub reranked: Vec<Reranked>,
    /// Length of the cluster candidate prefix `N₂` of `reranked`.
    pub n2: usize,
    pub clusters: Vec<ClusterTuple>,
    pub recommendations: Vec<Recommendation>,
}

/// Leaves kept by `Intersect(tuple, q)` within the tree of the first member.
pub fn intersect(n2: &[Reranked], tuple: &[usize], query: &Multiset<Feature>, mode: UnionMode) -> Vec<LeafId> {
    let first = &n2[tuple[0]].method;
    match tuple.len() {
        0 => Vec::new(),
        1 => n2[tuple[0]].pruned.retained.clone(),
        _ => {
            let target = n2[tuple[1]].method.multiset.sum(query);
            let mut kept = prune(&target, &first.features, None).retained;
            for &i in &tuple[2..] {
                let other = &n2[i].method.multiset;
                let target = match mode {
                    UnionMode::AsWritten => other.union(query),
                    UnionMode::Uniform => other.sum(query),
                };
                kept = prune(&target, &first.features, Some(&kept)).retained;
            }
            kept
        }
    }
}

/// Parses `source` and runs the pipeline.
pub fn recommend(index: &CorpusIndex, source: &str, config: &EngineConfig) -> Result<Vec<Recommendation>, RecommendError> {
    Ok(run(index, parse_query(source)?, config)?.recommendations)
}

/// Phase I, II and III for an annotated query.
pub fn run(index: &CorpusIndex, query: AnnotatedTree, config: &EngineConfig) -> Result<Trace, RecommendError> {
    let mut syms = Overlay::new(index.symbols());
    let features = featurize_tree(&query, &mut syms).multiset();
    if features.is_empty() {
        return Err(SearchError::EmptyQuery.into());
    }
    let qv = QueryVector::new(index, &features, &query, &mut syms);
    let phase1 = overlap_search(index, &qv, config.eta1)?;
    if phase1.is_empty() {
        return Err(RecommendError::NoResult);
    }
    let reranked = rerank(index, &features, &phase1, &syms);
    let n2 = reranked.iter().take(config.eta2).take_while(|r| r.normalized > config.tau1).count();
    let cand = &reranked[..n2];
    let full: Vec<_> = cand.iter().map(|r| r.method.multiset.clone()).collect();
    let pruned: Vec<_> = cand.iter().map(|r| r.pruned.features.clone()).collect();
    let th = Thresholds { tau2: config.tau2, tau3: config.tau3 };
    let clusters = grow_clusters(&Members { full: &full, pruned: &pruned }, th);
    let chosen: Vec<ClusterTuple> = dedup_sort(clusters.clone()).into_iter().take(config.top_k).collect();
    let opts = RenderOptions { placeholders: config.placeholders };
    let recommendations = chosen
        .iter()
        .enumerate()
        .map(|(rank, t)| build(index, cand, t, &features, config.union_mode, opts, rank + 1))
        .collect();
    Ok(Trace { query, features, phase1, reranked, n2, clusters, recommendations })
}

fn build(
    index: &CorpusIndex,
    n2: &[Reranked],
    t: &ClusterTuple,
    query: &Multiset<Feature>,
    mode: UnionMode,
    opts: RenderOptions,
    rank: usize,
) -> Recommendation {
    let first = &n2[t.indices[0]].method;
    let kept = if t.indices.len() == 1 {
        (0..first.tree.tree.leaf_count() as LeafId).collect()
    } else {
        intersect(n2, &t.indices, query, mode)
    };
    let mut mask = vec![false; first.tree.tree.leaf_count()];
    for &l in &kept {
        mask[l as usize] = true;
    }
    let reduced = Reduced::new(&first.tree.tree, &mask);
    let shown = reduced.leaves();
    let matched = prune(query, &first.features, Some(&shown));
    let (snippet, highlights) = reduced.render(&first.tree.tree, &|l| !matched.contains(l), opts);
    let methods = t
        .indices
        .iter()
        .map(|&i| {
            let id = n2[i].method.id;
            let m = index.method(id as usize);
            MethodRef { id, project: m.project.clone(), path: m.path.clone(), name: m.name.clone(), line: m.line, offset: m.offset }
        })
        .collect();
    Recommendation {
        rank,
        snippet,
        highlights,
        methods,
        cluster_size: t.indices.len(),
        tuple: t.indices.clone(),
        scores: Scores { cs: t.cs, csq: t.csq, l: t.l, s: t.s },
    }
}

/// The machine-readable result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationDocument {
    pub recommendations: Vec<Recommendation>,
}

impl RecommendationDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recommendation serialization")
    }
}

/// Plain-text listing of recommendations.
pub fn render_text(recs: &[Recommendation], markup: Markup) -> String {
    let mut out = String::new();
    for r in recs {
        let names: Vec<String> = r.methods.iter().map(|m| format!("{}:{} {}", m.path, m.line, m.name)).collect();
        out.push_str(&format!(
            "#{} cluster of {} (cs={} csq={} l={:.3} s={:.3})\n  from {}\n",
            r.rank,
            r.cluster_size,
            r.scores.cs,
            r.scores.csq,
            r.scores.l,
            r.scores.s,
            names.join(", ")
        ));
        for line in apply_markup(&r.snippet, &r.highlights, markup).lines() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
