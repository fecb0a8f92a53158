//! Query handling shared by the command line and the HTTP service.

pub mod service;

use serde_json::Value;
use structsearch::config::EngineConfig;
use structsearch::frontend::{import_tree, parse_query, AnnotatedTree, FrontendError};
use structsearch::index::CorpusIndex;
use structsearch::recommend::{run, RecommendError, Recommendation, RecommendationDocument};

/// Parses a query given as source text or as an interchange document.
pub fn parse_input(text: &str) -> Result<AnnotatedTree, FrontendError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(obj)) if obj.contains_key("kind") => import_tree(text),
        _ => parse_query(text),
    }
}

/// Parses a query from a request value: a source string or a tree object.
pub fn parse_value(query: &Value) -> Result<AnnotatedTree, FrontendError> {
    match query {
        Value::String(s) => parse_query(s),
        other => import_tree(&other.to_string()),
    }
}

/// Runs the pipeline; an index without any overlapping method yields no
/// recommendations rather than an error.
pub fn recommendations(index: &CorpusIndex, query: AnnotatedTree, config: &EngineConfig) -> Result<Vec<Recommendation>, RecommendError> {
    match run(index, query, config) {
        Ok(trace) => Ok(trace.recommendations),
        Err(RecommendError::NoResult) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// The machine-format output, byte for byte, with a trailing newline.
pub fn document(recommendations: Vec<Recommendation>) -> String {
    let mut out = RecommendationDocument { recommendations }.to_json();
    out.push('\n');
    out
}
