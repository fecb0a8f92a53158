//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_clusters, cluster_instance, exhaustive_best, prune_instance};
use structsearch::bench::{
    bootstrap_ci, compare_engines, gen_queries, reports_to_json, Engine, QueryKind, RecallReport,
};
use structsearch::config::EngineConfig;
use structsearch::featurizer::{featurize_tree, Interner, Overlay};
use structsearch::frontend::{parse_body, parse_query};
use structsearch::index::format::checksum;
use structsearch::index::{build_index, write_index, CorpusIndex};
use structsearch::recommend::{
    grow_clusters, jaccard, run, score_tuple, Members, RecommendationDocument, Reduced, RenderOptions, Thresholds,
};
use structsearch::rerank::{prune, rerank_loaded, MethodCache};
use structsearch::search::{overlap_search, QueryVector};
use structsearch::synth::{synthetic_corpus, SynthConfig};

const CORPUS_METHODS: usize = 10_000;
const CORPUS_SEED: u64 = 42;
const QUERY_SEED: u64 = 7;

const SELF_QUERIES: usize = 500;
const SELF_TIME_LIMIT_S: f64 = 300.0;

const BENCH_QUERIES: usize = 1000;
const CONTIGUOUS_R1: f64 = 0.95;
const CONTIGUOUS_R100: f64 = 0.995;
const NON_CONTIGUOUS_R1: f64 = 0.93;
const NON_CONTIGUOUS_R100: f64 = 0.99;
const BASELINE_R100: f64 = 0.9;

const CI_HALF_WIDTH: f64 = 0.01;
const CI_FORMULA_TOLERANCE: f64 = 1e-12;

const PRUNE_INSTANCES: usize = 200;
const PRUNE_RATIO: f64 = 0.9;
const PRUNE_EXACT_RATE: f64 = 0.8;

const PHASE3_QUERIES: usize = 200;
const GROWTH_INSTANCES: usize = 50;

const LATENCY_METHODS: usize = 100_000;
const LATENCY_QUERIES: usize = 20;
const LATENCY_MEAN_S: f64 = 5.0;

const DETERMINISM_QUERIES: usize = 100;
const DETERMINISM_DOCS: usize = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn self_retrieval(index: &CorpusIndex, cache: &MethodCache, config: &EngineConfig) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(QUERY_SEED);
    let ids: Vec<u32> = (0..index.len() as u32).collect();
    let sample: Vec<u32> = ids.choose_multiple(&mut rng, SELF_QUERIES).copied().collect();
    let mut failures = Vec::new();
    for &id in &sample {
        let m = index.method(id as usize);
        let query = format!("void {}({}) {}", m.name, m.params.iter().map(|p| format!("Object {p}")).collect::<Vec<_>>().join(", "), m.body);
        let tree = parse_query(&query).expect("corpus bodies parse");
        let mut syms = Overlay::new(index.symbols());
        let features = featurize_tree(&tree, &mut syms).multiset();
        let qv = QueryVector::new(index, &features, &tree, &mut syms);
        let cands = overlap_search(index, &qv, config.eta1).expect("non-empty query");
        let ids: Vec<u32> = cands.iter().map(|c| c.method).collect();
        let ranked = rerank_loaded(&features, &cands, cache.get(&ids));
        let top = ranked.first();
        if !top.is_some_and(|r| r.method.id == id && r.normalized == 1.0) {
            failures.push((id, top.map(|r| (r.method.id, r.normalized))));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < SELF_TIME_LIMIT_S;
    verdict(
        pass,
        format!(
            "{}/{} origins at rank 1 with similarity 1.0 in {:.1}s (limit {SELF_TIME_LIMIT_S}s){}",
            SELF_QUERIES - failures.len(),
            SELF_QUERIES,
            elapsed,
            failures.first().map(|f| format!("; first miss {f:?}")).unwrap_or_default()
        ),
    )
}

fn recall_lines(contiguous: &RecallReport, non_contiguous: &RecallReport) -> Verdict {
    let c = contiguous.engine(Engine::Reranked).unwrap();
    let n = non_contiguous.engine(Engine::Reranked).unwrap();
    let pass = c.recall_at_1 >= CONTIGUOUS_R1
        && c.recall_at_100 >= CONTIGUOUS_R100
        && n.recall_at_1 >= NON_CONTIGUOUS_R1
        && n.recall_at_100 >= NON_CONTIGUOUS_R100
        && contiguous.queries == BENCH_QUERIES
        && non_contiguous.queries == BENCH_QUERIES;
    verdict(
        pass,
        format!(
            "contiguous R@1 {:.4} (>= {CONTIGUOUS_R1}) R@100 {:.4} (>= {CONTIGUOUS_R100}); non-contiguous R@1 {:.4} (>= {NON_CONTIGUOUS_R1}) R@100 {:.4} (>= {NON_CONTIGUOUS_R100}); {} + {} queries",
            c.recall_at_1, c.recall_at_100, n.recall_at_1, n.recall_at_100, contiguous.queries, non_contiguous.queries
        ),
    )
}

fn baseline_order(reports: &[&RecallReport]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in reports {
        let ours = r.engine(Engine::Reranked).unwrap().recall_at_1;
        for b in [Engine::TfidfFeature, Engine::TfidfKeyword] {
            let e = r.engine(b).unwrap();
            pass &= ours > e.recall_at_1 && e.recall_at_100 >= BASELINE_R100;
            parts.push(format!("{:?} {} R@1 {:.4} R@100 {:.4}", r.kind, b.label(), e.recall_at_1, e.recall_at_100));
        }
        parts.push(format!("{:?} reranked R@1 {:.4}", r.kind, ours));
    }
    verdict(pass, parts.join("; "))
}

fn bootstrap(contiguous: &RecallReport) -> Verdict {
    let ci = contiguous.engine(Engine::Reranked).unwrap().ci_at_1;
    let xs = [0.99, 1.00, 0.98, 0.97, 1.00, 0.995, 0.985, 0.99];
    // θ̂ = 0.98875, σ̂ = 0.0102643627594285100, 1.96 σ̂ / √8 = 0.00711284050151555135.
    let hand = bootstrap_ci(&xs);
    let formula_error = (hand.mean - 0.98875).abs().max((hand.half_width - 0.007_112_840_501_515_551).abs());
    let pass = ci.resamples == 30 && ci.half_width <= CI_HALF_WIDTH && formula_error <= CI_FORMULA_TOLERANCE;
    verdict(
        pass,
        format!(
            "B={} contiguous R@1 {:.4} ± {:.4} (<= {CI_HALF_WIDTH}); formula error {:.1e} (<= {CI_FORMULA_TOLERANCE:e})",
            ci.resamples, ci.mean, ci.half_width, formula_error
        ),
    )
}

fn render_pruned(query: &str, method: &str) -> String {
    let q = parse_query(query).unwrap();
    let m = parse_body(&format!("{{ {method} }}"), &[]).unwrap();
    let mut syms = Interner::new();
    let target = featurize_tree(&q, &mut syms).multiset();
    let p = prune(&target, &featurize_tree(&m, &mut syms), None);
    let mut mask = vec![false; m.tree.leaf_count()];
    for &l in &p.retained {
        mask[l as usize] = true;
    }
    Reduced::new(&m.tree, &mask).render(&m.tree, &|_| false, RenderOptions::default()).0
}

fn prune_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut syms = Interner::new();
    let (mut exact, mut worst) = (0usize, 1.0f64);
    for _ in 0..PRUNE_INSTANCES {
        let (features, target) = prune_instance(&mut rng, &mut syms);
        let best = exhaustive_best(&target, &features);
        let greedy = prune(&target, &features, None).score;
        if best > 0 {
            worst = worst.min(greedy as f64 / best as f64);
        }
        exact += usize::from(greedy == best);
    }
    let rate = exact as f64 / PRUNE_INSTANCES as f64;
    let first = render_pruned("x = 1; y = 2;", "y = 2; z = 3;");
    let second = render_pruned("x = 1; if (y > 1) if (z < 0) w = 4;", "if (z < 0) if (y > 1) w = 4; v = 10;");
    let examples = first == "y = 2;" && second == "if (z < 0) if (y > 1) w = 4;";
    let pass = worst >= PRUNE_RATIO && rate >= PRUNE_EXACT_RATE && examples;
    verdict(
        pass,
        format!(
            "{PRUNE_INSTANCES} trees: worst greedy/optimal {worst:.3} (>= {PRUNE_RATIO}), exact {rate:.3} (>= {PRUNE_EXACT_RATE}); examples {:?} and {:?}",
            first, second
        ),
    )
}

fn phase3(index: &CorpusIndex, config: &EngineConfig) -> Verdict {
    let set = gen_queries(index, PHASE3_QUERIES, QueryKind::Contiguous, QUERY_SEED + 1).unwrap();
    let th = Thresholds { tau2: config.tau2, tau3: config.tau3 };
    let (mut emitted, mut violations, mut max_k) = (0usize, Vec::new(), 0usize);
    for q in &set.queries {
        let Ok(trace) = run(index, parse_query(&q.source).unwrap(), config) else { continue };
        let n2 = &trace.reranked[..trace.n2];
        let full: Vec<_> = n2.iter().map(|r| r.method.multiset.clone()).collect();
        let pruned: Vec<_> = n2.iter().map(|r| prune(&trace.features, &r.method.features, None).features).collect();
        let members = Members { full: &full, pruned: &pruned };
        max_k = max_k.max(trace.recommendations.len());
        for (i, r) in trace.recommendations.iter().enumerate() {
            emitted += 1;
            let (cs, csq) = score_tuple(&members, &r.tuple);
            let (l, s) = (cs as f64 / csq as f64, csq as f64 / pruned[r.tuple[0]].total() as f64);
            if !(l > th.tau2 && s > th.tau3) {
                violations.push(format!("tuple {:?} l={l:.3} s={s:.3}", r.tuple));
            }
            for o in &trace.recommendations[i + 1..] {
                if jaccard(&r.tuple, &o.tuple) > 0.5 {
                    violations.push(format!("tuples {:?} {:?} overlap", r.tuple, o.tuple));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut growth_mismatch = 0;
    for _ in 0..GROWTH_INSTANCES {
        let (full, pruned) = cluster_instance(&mut rng);
        let members = Members { full: &full, pruned: &pruned };
        let got: BTreeSet<(Vec<usize>, u64, u64)> =
            grow_clusters(&members, th).into_iter().map(|t| (t.indices, t.cs, t.csq)).collect();
        growth_mismatch += usize::from(got != brute_force_clusters(&members, th));
    }
    let pass = emitted > 0 && violations.is_empty() && max_k <= config.top_k && growth_mismatch == 0;
    verdict(
        pass,
        format!(
            "{emitted} recommendations over {} queries, {} violations{}, max per query {max_k} (<= {}); growth mismatches {growth_mismatch}/{GROWTH_INSTANCES}",
            set.queries.len(),
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default(),
            config.top_k
        ),
    )
}

fn latency(config: &EngineConfig) -> Verdict {
    let start = Instant::now();
    let index = build_index(&synthetic_corpus(&SynthConfig::new(LATENCY_METHODS, 11))).unwrap();
    let build = start.elapsed().as_secs_f64();
    let set = gen_queries(&index, LATENCY_QUERIES, QueryKind::Contiguous, 3).unwrap();
    let mut total = 0.0;
    let mut answered = 0;
    for q in &set.queries {
        let t = Instant::now();
        let out = structsearch::recommend::recommend(&index, &q.source, config);
        total += t.elapsed().as_secs_f64();
        answered += usize::from(out.is_ok());
    }
    let mean = total / set.queries.len() as f64;
    verdict(
        mean < LATENCY_MEAN_S,
        format!(
            "{} methods indexed in {build:.1}s; mean recommend {mean:.3}s over {} queries ({answered} answered, limit {LATENCY_MEAN_S}s)",
            index.len(),
            set.queries.len()
        ),
    )
}

fn determinism(config: &EngineConfig) -> Verdict {
    let build = || build_index(&synthetic_corpus(&SynthConfig::new(CORPUS_METHODS, CORPUS_SEED))).unwrap();
    let (a, b) = (build(), build());
    let (ba, bb) = (write_index(&a), write_index(&b));
    let same_index = checksum(&ba) == checksum(&bb) && ba == bb;

    let report = |index: &CorpusIndex| {
        let cache = MethodCache::build(index);
        let reports: Vec<RecallReport> = [QueryKind::Contiguous, QueryKind::NonContiguous]
            .into_iter()
            .map(|kind| {
                let set = gen_queries(index, DETERMINISM_QUERIES, kind, QUERY_SEED).unwrap();
                compare_engines(index, Some(&cache), &set, kind, &Engine::ALL, config)
            })
            .collect();
        reports_to_json(&reports)
    };
    let same_report = report(&a) == report(&b);

    let docs = |index: &CorpusIndex| {
        let set = gen_queries(index, DETERMINISM_DOCS, QueryKind::NonContiguous, QUERY_SEED + 2).unwrap();
        set.queries
            .iter()
            .map(|q| {
                let recommendations = structsearch::recommend::recommend(index, &q.source, config).unwrap_or_default();
                RecommendationDocument { recommendations }.to_json()
            })
            .collect::<Vec<_>>()
    };
    let same_docs = docs(&a) == docs(&b);
    let hex: String = checksum(&ba).unwrap().iter().take(8).map(|b| format!("{b:02x}")).collect();
    verdict(
        same_index && same_report && same_docs,
        format!("index checksum {hex}.. equal: {same_index}; bench report equal: {same_report}; recommendation documents equal: {same_docs}"),
    )
}

fn main() -> ExitCode {
    let config = EngineConfig::default();
    let start = Instant::now();
    let index = build_index(&synthetic_corpus(&SynthConfig::new(CORPUS_METHODS, CORPUS_SEED))).unwrap();
    let cache = MethodCache::build(&index);
    println!("corpus: {} methods, {} features, ready in {:.1}s", index.len(), index.feature_count(), start.elapsed().as_secs_f64());

    let mut verdicts = vec![(1, self_retrieval(&index, &cache, &config))];
    let reports: Vec<RecallReport> = [QueryKind::Contiguous, QueryKind::NonContiguous]
        .into_iter()
        .map(|kind| {
            let set = gen_queries(&index, BENCH_QUERIES, kind, QUERY_SEED).unwrap();
            compare_engines(&index, Some(&cache), &set, kind, &Engine::ALL, &config)
        })
        .collect();
    verdicts.push((2, recall_lines(&reports[0], &reports[1])));
    verdicts.push((3, baseline_order(&[&reports[0], &reports[1]])));
    verdicts.push((4, bootstrap(&reports[0])));
    verdicts.push((5, prune_oracle()));
    verdicts.push((6, phase3(&index, &config)));
    drop(cache);
    verdicts.push((7, latency(&config)));
    verdicts.push((8, determinism(&config)));

    let mut ok = true;
    for (id, v) in &verdicts {
        println!("criterion {id}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        ok &= v.pass;
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
