//! Source text to annotated simplified parse trees.

pub mod interchange;
pub mod lexer;
pub mod parser;
pub mod scope;
pub mod tree;
pub mod unit;

use thiserror::Error;

pub use interchange::{export_tree, import_tree};
pub use lexer::{strip_comments, tokenize, Span, Token, TokenKind};
pub use parser::{parse_block, parse_method, parse_snippet};
pub use scope::{classify_snippet, classify_variables, AnnotatedTree, VarClass, VariableAnnotation};
pub use tree::{Element, Leaf, LeafId, Node, NodeId, Role, SimplifiedParseTree};
pub use unit::{content_hash, normalize_whitespace, parse_compilation_unit, BodyFormat, MethodDecl, MethodSource};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("lex error at line {line} (offset {offset}): {message}")]
    Lex { offset: usize, line: u32, message: String },
    #[error("parse error at line {line} (offset {offset}): expected one of {expected:?}, found {found:?}")]
    Parse { offset: usize, line: u32, expected: Vec<String>, found: String },
    #[error("empty snippet")]
    EmptySnippet,
    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },
}

/// Parses a query: a full method declaration (`Type name(params) { ... }`),
/// a method body, or a statement/expression snippet. Parameters of a method
/// declaration are treated as locals.
pub fn parse_query(source: &str) -> Result<AnnotatedTree, FrontendError> {
    let tokens = tokenize(source)?;
    if let Some(decl) = unit::method_declaration(source, &tokens) {
        if let Ok(tree) = decl.parse() {
            return Ok(tree);
        }
    }
    let tree = parse_method(&tokens)?;
    Ok(AnnotatedTree::snippet(tree))
}

/// Parses a method body with the given parameter names.
pub fn parse_body(body: &str, params: &[String]) -> Result<AnnotatedTree, FrontendError> {
    let tokens = tokenize(body)?;
    let tree = parse_block(&tokens)?;
    Ok(AnnotatedTree::new(tree, params))
}
