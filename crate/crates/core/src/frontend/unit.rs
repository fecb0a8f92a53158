//! Locating method declarations inside source files.
//!
//! Files are scanned at the token level: type declarations are entered,
//! fields and initializers are skipped, and each method or constructor with a
//! body yields a [`MethodDecl`]. Bodies are parsed separately, so one broken
//! method never hides the others.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lexer::{tokenize, Token, TokenKind};
use super::{import_tree, parse_body, AnnotatedTree, FrontendError};

/// A method found in a source file. `body` is the brace-delimited block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: String,
    /// Byte offset of the body's `{` within the file.
    pub offset: usize,
    /// Line of the body's `{` within the file.
    pub line: u32,
}

impl MethodDecl {
    pub fn parse(&self) -> Result<AnnotatedTree, FrontendError> {
        parse_body(&self.body, &self.params)
    }
}

/// How a stored method body is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BodyFormat {
    /// Source text of a brace-delimited block.
    #[default]
    Source,
    /// An interchange document.
    Interchange,
}

/// Corpus-level description of one method body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSource {
    pub project: String,
    pub path: String,
    pub name: String,
    pub params: Vec<String>,
    pub body: String,
    pub format: BodyFormat,
    pub line: u32,
    pub offset: usize,
    pub hash: u64,
}

impl MethodSource {
    pub fn new(project: &str, path: &str, decl: MethodDecl) -> Self {
        let hash = content_hash(&decl.body);
        Self {
            project: project.to_string(),
            path: path.to_string(),
            name: decl.name,
            params: decl.params,
            body: decl.body,
            format: BodyFormat::Source,
            line: decl.line,
            offset: decl.offset,
            hash,
        }
    }

    /// A method given as an interchange document.
    pub fn interchange(project: &str, path: &str, name: &str, document: String) -> Self {
        Self {
            project: project.to_string(),
            path: path.to_string(),
            name: name.to_string(),
            params: Vec::new(),
            hash: content_hash(&document),
            body: document,
            format: BodyFormat::Interchange,
            line: 1,
            offset: 0,
        }
    }

    pub fn parse(&self) -> Result<AnnotatedTree, FrontendError> {
        match self.format {
            BodyFormat::Source => parse_body(&self.body, &self.params),
            BodyFormat::Interchange => import_tree(&self.body),
        }
    }
}

/// Collapses every whitespace run to one space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// First eight bytes (little endian) of the SHA-256 of the whitespace
/// normalized text.
pub fn content_hash(text: &str) -> u64 {
    let digest = Sha256::digest(normalize_whitespace(text).as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

struct Scanner<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
    out: Vec<MethodDecl>,
}

impl Scanner<'_> {
    fn at(&self, text: &str) -> bool {
        self.toks.get(self.pos).is_some_and(|t| t.is(text))
    }

    /// Index just past the bracket matching the one at `open`.
    fn matching(&self, open: usize) -> Option<usize> {
        let (o, c) = match self.toks[open].text.as_str() {
            "{" => ("{", "}"),
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            _ => return None,
        };
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            if t.is(o) {
                depth += 1;
            } else if t.is(c) {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
        }
        None
    }

    fn skip_to_semicolon(&mut self) {
        while self.pos < self.toks.len() {
            if self.at(";") {
                self.pos += 1;
                return;
            }
            if self.at("{") || self.at("(") || self.at("[") {
                self.pos = self.matching(self.pos).unwrap_or(self.toks.len());
            } else if self.at("}") {
                return;
            } else {
                self.pos += 1;
            }
        }
    }

    fn compilation_unit(&mut self) {
        while self.pos < self.toks.len() {
            if self.at("package") || self.at("import") {
                self.skip_to_semicolon();
            } else if self.at("class") || self.at("interface") || self.at("enum") {
                self.type_declaration();
            } else {
                self.pos += 1;
            }
        }
    }

    fn type_declaration(&mut self) {
        let is_enum = self.at("enum");
        while self.pos < self.toks.len() && !self.at("{") {
            self.pos += 1;
        }
        let Some(end) = (self.pos < self.toks.len()).then(|| self.matching(self.pos)).flatten() else {
            self.pos = self.toks.len();
            return;
        };
        self.pos += 1;
        if is_enum {
            // Constants run up to the first top-level `;`.
            while self.pos < end - 1 && !self.at(";") {
                if self.at("{") || self.at("(") {
                    self.pos = self.matching(self.pos).unwrap_or(end - 1);
                } else {
                    self.pos += 1;
                }
            }
        }
        while self.pos < end - 1 {
            self.member(end - 1);
        }
        self.pos = end;
    }

    fn member(&mut self, end: usize) {
        if self.at("class") || self.at("interface") || self.at("enum") {
            self.type_declaration();
            return;
        }
        if self.at("{") || self.at(";") {
            self.pos = if self.at("{") { self.matching(self.pos).unwrap_or(end) } else { self.pos + 1 };
            return;
        }
        if self.at("@") && self.toks.get(self.pos + 1).is_some_and(|t| !t.is("interface")) {
            self.pos += 2;
            while self.at(".") {
                self.pos += 2;
            }
            if self.at("(") {
                self.pos = self.matching(self.pos).unwrap_or(end);
            }
            return;
        }
        // Find a `(` (method) or `=`/`;` (field) at this level.
        let start = self.pos;
        let mut i = start;
        while i < end {
            let t = &self.toks[i];
            if t.is("(") {
                break;
            }
            if t.is("=") || t.is(";") || t.is("{") || t.is("class") || t.is("interface") || t.is("enum") {
                break;
            }
            i += 1;
        }
        if i >= end || !self.toks[i].is("(") || i == start || self.toks[i - 1].kind != TokenKind::NonKeyword {
            if i < end && (self.toks[i].is("class") || self.toks[i].is("interface") || self.toks[i].is("enum")) {
                self.pos = i;
                self.type_declaration();
                return;
            }
            self.skip_to_semicolon();
            if self.pos == start {
                self.pos += 1;
            }
            return;
        }
        let name = self.toks[i - 1].text.clone();
        let Some(close) = self.matching(i) else {
            self.pos = end;
            return;
        };
        let params = parameter_names(&self.toks[i + 1..close - 1]);
        let mut j = close;
        while j < end && !self.toks[j].is("{") && !self.toks[j].is(";") {
            j += 1;
        }
        if j >= end || self.toks[j].is(";") {
            self.pos = (j + 1).min(end);
            return;
        }
        let Some(body_end) = self.matching(j) else {
            self.pos = end;
            return;
        };
        let open = &self.toks[j];
        let last = &self.toks[body_end - 1];
        self.out.push(MethodDecl {
            name,
            params,
            body: self.src[open.span.offset..last.span.end()].to_string(),
            offset: open.span.offset,
            line: open.line,
        });
        self.pos = body_end;
    }
}

/// Last identifier of each top-level comma-separated parameter.
fn parameter_names(toks: &[Token]) -> Vec<String> {
    let mut names = Vec::new();
    let mut depth = 0i32;
    let mut last: Option<&str> = None;
    for t in toks {
        match t.text.as_str() {
            "<" | "(" | "[" if t.kind == TokenKind::Keyword => depth += 1,
            ">" | ")" | "]" if t.kind == TokenKind::Keyword => depth -= 1,
            "," if t.kind == TokenKind::Keyword && depth == 0 => {
                names.extend(last.take().map(str::to_string));
            }
            _ if t.kind == TokenKind::NonKeyword && depth == 0 => last = Some(&t.text),
            _ => {}
        }
    }
    names.extend(last.map(str::to_string));
    names
}

/// Every method or constructor body declared in `source`.
pub fn parse_compilation_unit(source: &str) -> Result<Vec<MethodDecl>, FrontendError> {
    let toks = tokenize(source)?;
    let mut s = Scanner { src: source, toks: &toks, pos: 0, out: Vec::new() };
    s.compilation_unit();
    Ok(s.out)
}

/// Recognizes `source` as a single method declaration (modifiers, return
/// type, name, parameters, optional throws clause, body) spanning all tokens.
pub(crate) fn method_declaration(source: &str, toks: &[Token]) -> Option<MethodDecl> {
    let paren = toks.iter().position(|t| t.is("("))?;
    if paren == 0 || toks[paren - 1].kind != TokenKind::NonKeyword {
        return None;
    }
    if toks[..paren - 1].iter().any(|t| {
        t.kind == TokenKind::Keyword
            && matches!(t.text.as_str(), "=" | ";" | "{" | "}" | "(" | ")" | "." | "new" | "return")
    }) {
        return None;
    }
    let mut s = Scanner { src: source, toks, pos: 0, out: Vec::new() };
    s.member(toks.len());
    if s.pos == toks.len() && s.out.len() == 1 {
        s.out.pop()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = r#"
package demo.app;
import java.io.InputStream;

@SuppressWarnings("unused")
public class Loader extends Base implements Runnable {
    private static final String TAG = "Loader";
    private int[] counts = {1, 2, 3};

    public Loader(Context ctx) { super(ctx); }

    @Override
    public void run() {
        load("a");
    }

    abstract void hook();

    static <T> List<T> wrap(Map<String, T> m, int n) throws IOException {
        return new ArrayList<>(m.values());
    }

    class Inner {
        int twice(int x) { return x * 2; }
    }

    enum Mode { FAST, SLOW; boolean quick() { return this == FAST; } }
}
"#;

    #[test]
    fn finds_methods_and_constructors() {
        let methods = parse_compilation_unit(FILE).unwrap();
        let names: Vec<_> = methods.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, vec!["Loader", "run", "wrap", "twice", "quick"]);
        let wrap = &methods[2];
        assert_eq!(wrap.params, vec!["m", "n"]);
        assert!(wrap.body.starts_with('{') && wrap.body.ends_with('}'));
        assert_eq!(&FILE[wrap.offset..wrap.offset + wrap.body.len()], wrap.body);
        for m in &methods {
            m.parse().unwrap();
        }
    }

    #[test]
    fn hash_ignores_whitespace_only() {
        assert_eq!(content_hash("{ x = 1; }"), content_hash("{\n   x = 1;\n}"));
        assert_ne!(content_hash("{ x = 1; }"), content_hash("{ y = 1; }"));
    }

    #[test]
    fn recognizes_method_declaration_queries() {
        let src = "void f(View view) { view.invalidate(); }";
        let toks = tokenize(src).unwrap();
        let decl = method_declaration(src, &toks).unwrap();
        assert_eq!(decl.params, vec!["view"]);
        for snippet in ["f(x);", "if (a) { b(); }", "x = g(y) + 1;", "new Foo() { };"] {
            let toks = tokenize(snippet).unwrap();
            assert!(method_declaration(snippet, &toks).is_none(), "{snippet}");
        }
    }
}
