use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::Arc;

use serde_json::{json, Value};
use structsearch::config::EngineConfig;
use structsearch::index::load_index;
use structsearch_cli::service::{router, AppState};

const BIN: &str = env!("CARGO_BIN_EXE_structsearch");

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(rel)
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("STRUCTSEARCH_INDEX")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn bitmap_index(dir: &Path) -> PathBuf {
    let idx = dir.join("bitmap.idx");
    let out = run(&["index", data("bitmap").to_str().unwrap(), "-o", idx.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    idx
}

fn http(addr: std::net::SocketAddr, request: &str) -> (u16, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    s.write_all(request.as_bytes()).unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let status = raw.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = raw.split_once("\r\n\r\n").map(|(_, b)| b.to_string()).unwrap_or_default();
    (status, body)
}

fn post(addr: std::net::SocketAddr, body: &str) -> (u16, String) {
    http(
        addr,
        &format!(
            "POST /recommend HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        ),
    )
}

fn start_service(index: &Path) -> (tokio::runtime::Runtime, std::net::SocketAddr) {
    let state = Arc::new(AppState { index: load_index(index).unwrap(), config: EngineConfig::default() });
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, router(state)).await.unwrap() });
    (rt, addr)
}

#[test]
fn index_summary_and_recommendations() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("b.idx");
    let out = run(&["index", data("bitmap").to_str().unwrap(), "-o", idx.to_str().unwrap()], None);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    for key in ["methods      7", "features", "duplicate", "elapsed"] {
        assert!(summary.contains(key), "{summary}");
    }
    let query = data("bitmap_query.txt");
    let out = run(&["recommend", query.to_str().unwrap(), "-i", idx.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("#1 cluster of"));
}

#[test]
fn json_output_follows_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let query = data("bitmap_query.txt");
    let out = run(&["recommend", query.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json"], None);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let recs = doc["recommendations"].as_array().unwrap();
    assert!(!recs.is_empty() && recs.len() <= 5);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r["rank"], json!(i + 1));
        assert!(r["snippet"].is_string());
        let len = r["snippet"].as_str().unwrap().len() as u64;
        for h in r["highlights"].as_array().unwrap() {
            assert!(h["start"].as_u64().unwrap() < h["end"].as_u64().unwrap());
            assert!(h["end"].as_u64().unwrap() <= len);
        }
        let methods = r["methods"].as_array().unwrap();
        assert_eq!(r["cluster_size"], json!(methods.len()));
        for m in methods {
            for k in ["project", "path", "name"] {
                assert!(m[k].is_string(), "{m}");
            }
            for k in ["id", "line", "offset"] {
                assert!(m[k].is_u64(), "{m}");
            }
        }
        for k in ["cs", "csq", "l", "s"] {
            assert!(r["scores"][k].is_number(), "{r}");
        }
    }
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let idx = idx.to_str().unwrap();
    assert_eq!(run(&["recommend", "-i", idx], Some("if (")).status.code(), Some(3));
    assert_eq!(run(&["recommend", "-i", idx], Some("int q = 77;")).status.code(), Some(4));
    let bad = dir.path().join("bad.idx");
    std::fs::write(&bad, b"not an index").unwrap();
    assert_eq!(run(&["recommend", "-i", bad.to_str().unwrap()], Some("x = 1;")).status.code(), Some(5));
    let missing = dir.path().join("missing");
    let out = run(&["index", missing.to_str().unwrap(), "-o", dir.path().join("m.idx").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn index_path_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let out = Command::new(BIN)
        .args(["recommend", data("bitmap_query.txt").to_str().unwrap()])
        .env("STRUCTSEARCH_INDEX", &idx)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let conf = dir.path().join("engine.toml");
    std::fs::write(&conf, "topk = 1\ntau1 = 0.1\n").unwrap();
    let q = data("bitmap_query.txt");
    let count = |extra: &[&str]| {
        let mut args = vec!["recommend", q.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json"];
        args.extend_from_slice(extra);
        let out = run(&args, None);
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        doc["recommendations"].as_array().unwrap().len()
    };
    assert_eq!(count(&["--config", conf.to_str().unwrap()]), 1);
    assert_eq!(count(&["--config", conf.to_str().unwrap(), "--topk", "3"]), 3);
    std::fs::write(&conf, "topk = \"many\"\n").unwrap();
    let out = run(&["recommend", q.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--config", conf.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn duplicate_corpus_indexes_one_method() {
    let dir = tempfile::tempdir().unwrap();
    let body = "class A {\n  int twice(int x) {\n    return x * 2;\n  }\n}\n";
    for p in ["one", "two", "three"] {
        std::fs::create_dir_all(dir.path().join("corpus").join(p)).unwrap();
        std::fs::write(dir.path().join("corpus").join(p).join("A.java"), body).unwrap();
    }
    let idx = dir.path().join("d.idx");
    let out = run(&["index", dir.path().join("corpus").to_str().unwrap(), "-o", idx.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("methods      1\n"));
}

#[test]
fn tree_interchange_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("q.json");
    let q = data("bitmap_query.txt");
    let out = run(&["export-tree", q.to_str().unwrap(), "-o", tree.to_str().unwrap()], None);
    assert!(out.status.success());
    let out = run(&["import-tree", tree.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("BitmapFactory.decodeStream"), "{text}");
    assert_eq!(run(&["import-tree"], Some("{\"kind\": 17}")).status.code(), Some(3));

    let idx = bitmap_index(dir.path());
    let a = run(&["recommend", q.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json"], None);
    let b = run(&["recommend", tree.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json"], None);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn service_matches_cli_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let q = data("bitmap_query.txt");
    let query = std::fs::read_to_string(&q).unwrap();
    let (_rt, addr) = start_service(&idx);

    let cli = run(&["recommend", q.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json"], None);
    let (status, body) = post(addr, &json!({ "query": query }).to_string());
    assert_eq!(status, 200);
    assert_eq!(body.as_bytes(), cli.stdout.as_slice());

    let cli = run(&["recommend", q.to_str().unwrap(), "-i", idx.to_str().unwrap(), "--format", "json", "--topk", "2"], None);
    let (_, body) = post(addr, &json!({ "query": query, "config": { "topk": 2 } }).to_string());
    assert_eq!(body.as_bytes(), cli.stdout.as_slice());

    let tree = run(&["export-tree", q.to_str().unwrap()], None);
    let tree: Value = serde_json::from_slice(&tree.stdout).unwrap();
    let (status, body) = post(addr, &json!({ "query": tree, "config": { "topk": 2 } }).to_string());
    assert_eq!(status, 200);
    assert_eq!(body.as_bytes(), cli.stdout.as_slice());
}

#[test]
fn service_reports_health_and_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let idx = bitmap_index(dir.path());
    let (_rt, addr) = start_service(&idx);

    let (status, body) = http(addr, "GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n");
    assert_eq!(status, 200);
    let health: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(health["status"], "ok");
    assert_eq!(health["methods"], 7);

    for (request, expected) in [
        ("{not json", 400),
        ("{\"config\": {}}", 400),
        ("{\"query\": \"x = 1;\", \"extra\": 1}", 400),
        ("{\"query\": \"x = 1;\", \"config\": {\"topk\": \"many\"}}", 400),
        ("{\"query\": \"x = 1;\", \"config\": {\"tau1\": 7}}", 400),
        ("{\"query\": \"if (\"}", 422),
        ("{\"query\": {\"kind\": 3}}", 422),
    ] {
        let (status, body) = post(addr, request);
        assert_eq!(status, expected, "{request}: {body}");
        let err: Value = serde_json::from_str(&body).unwrap();
        assert!(!err["error"].as_str().unwrap().is_empty());
    }
    let (status, body) = post(addr, "{\"query\": \"int q = 77;\"}");
    assert_eq!(status, 200);
    assert_eq!(body, "{\n  \"recommendations\": []\n}\n");
}

#[test]
fn bench_emits_a_table_and_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert!(run(&["synth", corpus.to_str().unwrap(), "--methods", "200", "--seed", "3"], None).status.success());
    let idx = dir.path().join("s.idx");
    assert!(run(&["index", corpus.to_str().unwrap(), "-o", idx.to_str().unwrap()], None).status.success());
    let report = dir.path().join("r.json");
    let args = ["bench", "-i", idx.to_str().unwrap(), "-n", "30", "--report", report.to_str().unwrap(), "--seed", "9"];
    let out = run(&args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Recall@1") && table.contains("Recall@100"), "{table}");
    let first = std::fs::read(&report).unwrap();
    let parsed: Value = serde_json::from_slice(&first).unwrap();
    assert!(parsed.is_array() || parsed.is_object());
    run(&args, None);
    assert_eq!(std::fs::read(&report).unwrap(), first);
}
