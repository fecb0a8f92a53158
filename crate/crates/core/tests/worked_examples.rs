use std::path::{Path, PathBuf};

use structsearch::config::EngineConfig;
use structsearch::featurizer::{featurize_tree, Interner};
use structsearch::frontend::{parse_body, parse_query, AnnotatedTree};
use structsearch::index::{build_index, ingest, CorpusIndex};
use structsearch::recommend::{intersect, run, Reduced, RenderOptions};
use structsearch::rerank::prune;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

fn index_of(dir: &str) -> CorpusIndex {
    build_index(&ingest(&data(dir)).unwrap()).unwrap()
}

/// Renders the statements of `method` holding leaves kept by pruning against `query`.
fn pruned_text(query: &AnnotatedTree, method: &AnnotatedTree) -> String {
    let mut syms = Interner::new();
    let target = featurize_tree(query, &mut syms).multiset();
    let features = featurize_tree(method, &mut syms);
    let p = prune(&target, &features, None);
    let mut mask = vec![false; method.tree.leaf_count()];
    for &l in &p.retained {
        mask[l as usize] = true;
    }
    Reduced::new(&method.tree, &mask).render(&method.tree, &|_| false, RenderOptions::default()).0
}

fn body(src: &str) -> AnnotatedTree {
    parse_body(&format!("{{ {src} }}"), &[]).unwrap()
}

#[test]
fn common_assignment_is_the_intersection() {
    let text = pruned_text(&parse_query("x = 1; y = 2;").unwrap(), &body("y = 2; z = 3;"));
    assert_eq!(text, "y = 2;");
    assert_eq!(pruned_text(&body("x = 1; y = 2;"), &body("y = 2; z = 3;")), "y = 2;");
}

#[test]
fn swapped_nesting_keeps_both_ifs() {
    let method = body("if (z < 0) if (y > 1) w = 4; v = 10;");
    let expected = "if (z < 0) if (y > 1) w = 4;";
    assert_eq!(pruned_text(&parse_query("x = 1; if (y > 1) if (z < 0) w = 4;").unwrap(), &method), expected);
    assert_eq!(pruned_text(&body("x = 1; if (y > 1) if (z < 0) w = 4;"), &method), expected);
}

const INTERSECTION: &str = "\
if (!(view instanceof EditText)) {
    view.setOnTouchListener(new View.OnTouchListener() {
        public boolean onTouch(View v, MotionEvent event) {
            // your code...
            return false;
        }
    });
}
if (view instanceof ViewGroup) {
    for (int i = 0; i < ((ViewGroup) view).getChildCount(); i++) {
        View innerView = ((ViewGroup) view).getChildAt(i);
        setupUIToHideKeyBoardOnTouch(innerView);
    }
}";

#[test]
fn two_listener_methods_intersect_to_the_shared_scaffold() {
    let index = index_of("listeners");
    let query = std::fs::read_to_string(data("running_query.txt")).unwrap();
    let config = EngineConfig { placeholders: true, ..EngineConfig::default() };
    let trace = run(&index, parse_query(&query).unwrap(), &config).unwrap();
    assert_eq!(trace.n2, 2);

    let position = |name: &str| trace.reranked.iter().position(|r| index.method(r.method.id as usize).name == name).unwrap();
    let (first, second) = (position("setupUIToHideKeyBoardOnTouch"), position("setupUI"));
    let n2 = &trace.reranked[..trace.n2];
    let kept = intersect(n2, &[first, second], &trace.features, config.union_mode);
    let method = &n2[first].method;
    let mut mask = vec![false; method.tree.tree.leaf_count()];
    for &l in &kept {
        mask[l as usize] = true;
    }
    let reduced = Reduced::new(&method.tree.tree, &mask);
    let matched = prune(&trace.features, &method.features, Some(&reduced.leaves()));
    let (text, highlights) = reduced.render(&method.tree.tree, &|l| !matched.contains(l), RenderOptions { placeholders: true });
    assert_eq!(text, INTERSECTION);

    let mut marked: Vec<usize> = highlights.iter().map(|h| text[..h.start].matches('\n').count() + 1).collect();
    marked.dedup();
    assert_eq!(marked, vec![1, 2, 3, 4, 5, 12]);

    // The pipeline emits the same cluster, led by the other member.
    let top = &trace.recommendations[0];
    assert_eq!(top.cluster_size, 2);
    assert_eq!(top.snippet, INTERSECTION.replace("setupUIToHideKeyBoardOnTouch(", "setupUI("));
}

#[test]
fn bitmap_query_gets_configuration_and_error_handling() {
    let index = index_of("bitmap");
    let query = std::fs::read_to_string(data("bitmap_query.txt")).unwrap();
    let trace = run(&index, parse_query(&query).unwrap(), &EngineConfig::default()).unwrap();
    let recs = &trace.recommendations;
    assert!(!recs.is_empty() && recs.len() <= 5);
    assert!(recs.iter().any(|r| r.snippet.contains("inSampleSize") && r.snippet.contains("new BitmapFactory.Options()")));
    assert!(recs.iter().any(|r| r.snippet.contains("close();") && r.snippet.contains("catch (IOException")));
    for r in recs {
        assert!(!r.snippet.contains("countLines"));
        assert!(r.scores.l > 1.5 && r.scores.s > 0.9);
    }
}

#[test]
fn greedy_pruning_can_miss_a_full_match() {
    let src = std::fs::read_to_string(data("leb128.txt")).unwrap();
    let lines: Vec<&str> = src.lines().collect();
    let query: Vec<&str> = [0, 1, 2, 3, 4, 7].iter().map(|&i| lines[i]).collect();
    let query = query.join("\n");
    let q = body(&query);
    let m = body(&src);
    let mut syms = Interner::new();
    let target = featurize_tree(&q, &mut syms).multiset();
    let p = prune(&target, &featurize_tree(&m, &mut syms), None);
    assert!(p.score < target.total());
    assert!(p.retained.iter().any(|&l| matches!(m.tree.leaf(l).line, 6 | 7)));
}
