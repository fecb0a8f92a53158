//! Recall benchmark: partial-method queries, Recall@n, bootstrap intervals
//! and the TF-IDF baselines.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::featurizer::{featurize_tree, Feature, Multiset, Overlay};
use crate::frontend::{parse_query, strip_comments, tokenize, BodyFormat};
use crate::index::CorpusIndex;
use crate::rerank::{load_methods, prune, rerank, rerank_loaded, MethodCache};
use crate::search::{overlap_search, tfidf_feature_search, tfidf_keyword_search, QueryVector};

/// Minimum body lines of a sampled method.
pub const MIN_LINES: usize = 12;
/// Lines per query.
pub const QUERY_LINES: usize = 5;
/// Attempts at a parseable non-contiguous sample before the method is skipped.
pub const MAX_RETRIES: usize = 20;
/// Depth of each engine's result list.
pub const RESULT_DEPTH: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 30;
/// `Z_{α/2}` for `α = 0.05`.
pub const Z_975: f64 = 1.96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("corpus has {available} usable methods with at least {MIN_LINES} lines, {needed} queries requested")]
    InsufficientCorpus { needed: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    Contiguous,
    NonContiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkQuery {
    pub origin: u32,
    pub kind: QueryKind,
    /// 1-based positions among the non-blank body lines, ascending.
    pub lines: Vec<usize>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuerySet {
    pub seed: u64,
    pub queries: Vec<BenchmarkQuery>,
    /// Methods with enough lines.
    pub eligible: usize,
    /// Sampled methods dropped because no selection parsed.
    pub skipped: usize,
}

/// Non-blank lines strictly inside the outer braces, comments removed.
pub fn body_lines(body: &str) -> Vec<String> {
    let text = strip_comments(body);
    let inner = match (text.find('{'), text.rfind('}')) {
        (Some(a), Some(b)) if a < b => &text[a + 1..b],
        _ => return Vec::new(),
    };
    inner.lines().map(str::trim_end).filter(|l| !l.is_empty()).map(str::to_string).collect()
}

/// Joins the selected 1-based `picks` of `lines` into a block with the
/// nesting the lines have in the full body: a selected `{` is closed where
/// the body closes it, and a `}` whose `{` was not selected is dropped.
pub fn select_lines(lines: &[String], picks: &[usize]) -> Option<String> {
    let mut out = String::new();
    // Blocks open at the current body position, and the selected ones among them.
    let mut body: Vec<usize> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut blocks = 0usize;
    let mut next = picks.iter().peekable();
    for (i, line) in lines.iter().enumerate() {
        let tokens = tokenize(line).ok()?;
        let selected = next.peek() == Some(&&(i + 1));
        if selected {
            next.next();
            while open.last().is_some_and(|b| !body.contains(b)) {
                open.pop();
                out.push_str("}\n");
            }
        }
        let mut last = 0;
        for t in &tokens {
            if t.is("{") {
                blocks += 1;
                body.push(blocks);
                if selected {
                    open.push(blocks);
                }
            } else if t.is("}") {
                let closed = body.pop()?;
                if !selected {
                    continue;
                }
                if open.last() == Some(&closed) {
                    open.pop();
                } else {
                    out.push_str(&line[last..t.span.offset]);
                    last = t.span.end();
                }
            }
        }
        if selected {
            out.push_str(&line[last..]);
            out.push('\n');
        }
    }
    for _ in open {
        out.push_str("}\n");
    }
    Some(out)
}

/// The selected lines as a query, if they parse and contain a non-keyword
/// token.
fn query_from(lines: &[String], picks: &[usize]) -> Option<String> {
    let source = select_lines(lines, picks)?;
    let tree = parse_query(&source).ok()?;
    (tree.tree.leaf_count() > 0).then_some(source)
}

/// Samples `n` distinct methods with at least [`MIN_LINES`] body lines and
/// cuts a five-line query from each: lines 1 to 5, or five distinct lines
/// drawn uniformly and kept in source order.
pub fn gen_queries(index: &CorpusIndex, n: usize, kind: QueryKind, seed: u64) -> Result<QuerySet, BenchError> {
    let bodies: Vec<(u32, Vec<String>)> = index
        .methods()
        .par_iter()
        .enumerate()
        .filter(|(_, m)| m.format == BodyFormat::Source)
        .map(|(i, m)| (i as u32, body_lines(&m.body)))
        .filter(|(_, l)| l.len() >= MIN_LINES)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..bodies.len()).collect();
    order.shuffle(&mut rng);
    let mut set = QuerySet { seed, eligible: bodies.len(), ..QuerySet::default() };
    for k in order {
        if set.queries.len() == n {
            break;
        }
        let (origin, lines) = &bodies[k];
        let found = match kind {
            QueryKind::Contiguous => {
                let picks: Vec<usize> = (1..=QUERY_LINES).collect();
                query_from(lines, &picks).map(|s| (picks, s))
            }
            QueryKind::NonContiguous => (0..MAX_RETRIES).find_map(|_| {
                let mut picks: Vec<usize> = (1..=lines.len()).collect::<Vec<_>>().choose_multiple(&mut rng, QUERY_LINES).copied().collect();
                picks.sort_unstable();
                query_from(lines, &picks).map(|s| (picks, s))
            }),
        };
        match found {
            Some((lines, source)) => set.queries.push(BenchmarkQuery { origin: *origin, kind, lines, source }),
            None => set.skipped += 1,
        }
    }
    if set.queries.len() < n {
        return Err(BenchError::InsufficientCorpus { needed: n, available: set.queries.len() });
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Overlap search followed by pruning-based reranking.
    Reranked,
    TfidfFeature,
    TfidfKeyword,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::TfidfKeyword, Engine::TfidfFeature, Engine::Reranked];

    pub fn label(self) -> &'static str {
        match self {
            Engine::Reranked => "Overlap + rerank",
            Engine::TfidfFeature => "TF-IDF features",
            Engine::TfidfKeyword => "TF-IDF keywords",
        }
    }
}

/// Ranked method ids for one query, at most `depth` long.
pub fn run_engine(
    index: &CorpusIndex,
    cache: Option<&MethodCache>,
    source: &str,
    engine: Engine,
    config: &EngineConfig,
    depth: usize,
) -> Vec<u32> {
    let Ok(tree) = parse_query(source) else {
        return Vec::new();
    };
    let mut syms = Overlay::new(index.symbols());
    let features = featurize_tree(&tree, &mut syms).multiset();
    let qv = QueryVector::new(index, &features, &tree, &mut syms);
    ranked_ids(index, cache, &features, &qv, &syms, engine, config, depth)
}

#[allow(clippy::too_many_arguments)]
fn ranked_ids(
    index: &CorpusIndex,
    cache: Option<&MethodCache>,
    features: &Multiset<Feature>,
    qv: &QueryVector,
    syms: &Overlay,
    engine: Engine,
    config: &EngineConfig,
    depth: usize,
) -> Vec<u32> {
    match engine {
        Engine::Reranked => {
            let Ok(cands) = overlap_search(index, qv, config.eta1) else {
                return Vec::new();
            };
            let ranked = match cache {
                Some(c) => {
                    let ids: Vec<u32> = cands.iter().map(|c| c.method).collect();
                    rerank_loaded(features, &cands, c.get(&ids))
                }
                None => rerank(index, features, &cands, syms),
            };
            ranked.iter().take(depth).map(|r| r.method.id).collect()
        }
        Engine::TfidfFeature => {
            tfidf_feature_search(index, qv, depth).map(|r| r.into_iter().map(|s| s.method).collect()).unwrap_or_default()
        }
        Engine::TfidfKeyword => {
            tfidf_keyword_search(index, qv, depth).map(|r| r.into_iter().map(|s| s.method).collect()).unwrap_or_default()
        }
    }
}

/// 0-based rank of the origin in `results`, or 0 when the first result ties
/// with the origin: both prune to the same similarity against the query.
pub fn hit_rank(
    index: &CorpusIndex,
    cache: Option<&MethodCache>,
    query: &Multiset<Feature>,
    syms: &Overlay,
    results: &[u32],
    origin: u32,
) -> Option<usize> {
    let found = results.iter().position(|&r| r == origin);
    if found == Some(0) {
        return found;
    }
    let Some(&top) = results.first() else {
        return found;
    };
    let ids = [top, origin];
    let loaded = match cache {
        Some(c) => c.get(&ids),
        None => load_methods(index, &ids, syms),
    };
    let (Some(top), Some(origin)) = (&loaded[0], &loaded[1]) else {
        return found;
    };
    if prune(query, &top.features, None).score == prune(query, &origin.features, None).score {
        Some(0)
    } else {
        found
    }
}

/// Fraction of queries with a hit within the first `n` results.
pub fn recall_at(ranks: &[Option<usize>], n: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().filter(|r| r.is_some_and(|r| r < n)).count() as f64 / ranks.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean: f64,
    /// Sample standard deviation of the resampled values.
    pub stdev: f64,
    pub half_width: f64,
    pub resamples: usize,
    /// Fewer than two resamples: the deviation is undefined and reported as 0.
    pub degenerate: bool,
}

/// `θ̂ ± Z σ̂ / √B` over `B` resampled recall values.
pub fn bootstrap_ci(samples: &[f64]) -> BootstrapCi {
    let b = samples.len();
    if b == 0 {
        return BootstrapCi { mean: 0.0, stdev: 0.0, half_width: 0.0, resamples: 0, degenerate: true };
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return BootstrapCi { mean: samples[0], stdev: 0.0, half_width: 0.0, resamples: b, degenerate: b < 2 };
    }
    let mean = samples.iter().sum::<f64>() / b as f64;
    let stdev = (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1) as f64).sqrt();
    BootstrapCi { mean, stdev, half_width: Z_975 * stdev / (b as f64).sqrt(), resamples: b, degenerate: false }
}

/// Recall@`n` of `b` query sets drawn with replacement from `ranks`.
pub fn resampled_recalls(ranks: &[Option<usize>], n: usize, b: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..b)
        .map(|_| {
            let sample: Vec<Option<usize>> = (0..ranks.len()).map(|_| ranks[rng.random_range(0..ranks.len())]).collect();
            recall_at(&sample, n)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineRecall {
    pub engine: Engine,
    pub recall_at_1: f64,
    pub recall_at_100: f64,
    pub ci_at_1: BootstrapCi,
    pub ci_at_100: BootstrapCi,
    /// Hit rank per query, `None` when missing from the result list.
    pub ranks: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub seed: u64,
    pub kind: QueryKind,
    pub queries: usize,
    pub eligible: usize,
    pub skipped: usize,
    pub engines: Vec<EngineRecall>,
    pub flags: Vec<String>,
}

impl RecallReport {
    pub fn engine(&self, e: Engine) -> Option<&EngineRecall> {
        self.engines.iter().find(|r| r.engine == e)
    }
}

/// Runs each engine on every query of `set`.
pub fn compare_engines(
    index: &CorpusIndex,
    cache: Option<&MethodCache>,
    set: &QuerySet,
    kind: QueryKind,
    engines: &[Engine],
    config: &EngineConfig,
) -> RecallReport {
    let queries: Vec<&BenchmarkQuery> = set.queries.iter().filter(|q| q.kind == kind).collect();
    let mut flags = Vec::new();
    if queries.is_empty() {
        flags.push("no queries".to_string());
    }
    let mut results = Vec::new();
    for &engine in engines {
        let start = Instant::now();
        let ranks: Vec<Option<usize>> = queries.par_iter().map(|q| judge(index, cache, q, engine, config)).collect();
        if !queries.is_empty() {
            log::info!(
                "{}: {} queries, {:.1} ms per query",
                engine.label(),
                queries.len(),
                start.elapsed().as_secs_f64() * 1e3 / queries.len() as f64
            );
        }
        let salt = set.seed ^ (engine as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let ci_at_1 = bootstrap_ci(&resampled_recalls(&ranks, 1, BOOTSTRAP_RESAMPLES, salt));
        let ci_at_100 = bootstrap_ci(&resampled_recalls(&ranks, RESULT_DEPTH, BOOTSTRAP_RESAMPLES, salt));
        if !queries.is_empty() && ci_at_1.degenerate {
            flags.push(format!("{}: degenerate bootstrap", engine.label()));
        }
        results.push(EngineRecall {
            engine,
            recall_at_1: recall_at(&ranks, 1),
            recall_at_100: recall_at(&ranks, RESULT_DEPTH),
            ci_at_1,
            ci_at_100,
            ranks,
        });
    }
    RecallReport { seed: set.seed, kind, queries: queries.len(), eligible: set.eligible, skipped: set.skipped, engines: results, flags }
}

/// Hit rank of one benchmark query under `engine`.
pub fn judge(index: &CorpusIndex, cache: Option<&MethodCache>, q: &BenchmarkQuery, engine: Engine, config: &EngineConfig) -> Option<usize> {
    let tree = parse_query(&q.source).ok()?;
    let mut syms = Overlay::new(index.symbols());
    let features = featurize_tree(&tree, &mut syms).multiset();
    let qv = QueryVector::new(index, &features, &tree, &mut syms);
    let results = ranked_ids(index, cache, &features, &qv, &syms, engine, config, RESULT_DEPTH);
    hit_rank(index, cache, &features, &syms, &results, q.origin)
}

/// Stable JSON encoding of reports.
pub fn reports_to_json(reports: &[RecallReport]) -> String {
    serde_json::to_string_pretty(reports).expect("report serialization")
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

/// Engines as rows, Recall@1 and Recall@100 per query kind as columns.
pub fn render_table(reports: &[RecallReport]) -> String {
    let mut engines: Vec<Engine> = reports.iter().flat_map(|r| r.engines.iter().map(|e| e.engine)).collect();
    engines.sort_by_key(|e| Engine::ALL.iter().position(|x| x == e));
    engines.dedup();
    let kind = |k: QueryKind| match k {
        QueryKind::Contiguous => "contiguous",
        QueryKind::NonContiguous => "non-contiguous",
    };
    let mut out = String::new();
    let _ = write!(out, "{:<18}", "");
    for r in reports {
        let _ = write!(out, " | {:^29}", format!("{} (n={})", kind(r.kind), r.queries));
    }
    out.push('\n');
    let _ = write!(out, "{:<18}", "engine");
    for _ in reports {
        let _ = write!(out, " | {:>14} {:>14}", "Recall@1", "Recall@100");
    }
    out.push('\n');
    for e in engines {
        let _ = write!(out, "{:<18}", e.label());
        for r in reports {
            match r.engine(e) {
                Some(x) => {
                    let _ = write!(out, " | {:>14} {:>14}", pct(x.recall_at_1), pct(x.recall_at_100));
                }
                None => {
                    let _ = write!(out, " | {:>14} {:>14}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    for r in reports {
        for x in &r.engines {
            let _ = writeln!(
                out,
                "{} {}: Recall@1 {} ± {}, Recall@100 {} ± {} (B={})",
                kind(r.kind),
                x.engine.label(),
                pct(x.ci_at_1.mean),
                pct(x.ci_at_1.half_width),
                pct(x.ci_at_100.mean),
                pct(x.ci_at_100.half_width),
                x.ci_at_1.resamples
            );
        }
        if r.skipped > 0 {
            let _ = writeln!(out, "{}: {} sampled methods skipped (no parseable selection)", kind(r.kind), r.skipped);
        }
        for f in &r.flags {
            let _ = writeln!(out, "{}: {f}", kind(r.kind));
        }
    }
    let _ = writeln!(out, "seed {}", reports.first().map_or(0, |r| r.seed));
    out
}
