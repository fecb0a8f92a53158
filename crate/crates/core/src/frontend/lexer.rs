//! Tokenizer for the Java-like mini-language.
//!
//! Keyword tokens are the reserved words plus every operator and punctuation
//! symbol; everything else (identifiers and literals) is a non-keyword token.
//! Comments and whitespace are dropped. `>` is always emitted on its own so the
//! parser can close nested generic argument lists; shift operators are
//! reassembled from adjacent `>` tokens during parsing.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    NonKeyword,
}

/// Byte range of a token within its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    /// 1-based source line.
    pub line: u32,
}

impl Token {
    pub fn is_keyword(&self) -> bool {
        self.kind == TokenKind::Keyword
    }

    pub fn is(&self, text: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == text
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub const RESERVED_WORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while",
];

/// Literal words; non-keyword tokens like numbers and strings.
pub const LITERAL_WORDS: &[&str] = &["true", "false", "null"];

pub const PRIMITIVE_TYPES: &[&str] =
    &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

// Longest first so that greedy matching picks the longest symbol.
const SYMBOLS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "&=", "|=", "^=", "%=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "=", "<", ">",
    "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%", "@",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.binary_search(&word).is_ok()
}

/// Whether `text` belongs to the fixed keyword/symbol set of the language.
pub fn is_keyword_text(text: &str) -> bool {
    is_reserved(text) || SYMBOLS.contains(&text) || text == ">>=" || text == ">>>="
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32) {
        self.tokens.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            span: Span { offset: start, len: self.pos - start },
            line,
        });
    }

    fn error(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex { offset: self.pos, line: self.line, message: message.into() }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            let line = self.line;
            if c.is_whitespace() {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c == '/' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                loop {
                    match self.bump() {
                        Some('*') if self.peek() == Some('/') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {}
                        None => {
                            return Err(FrontendError::Lex {
                                offset: start,
                                line,
                                message: "unterminated block comment".into(),
                            })
                        }
                    }
                }
            } else if is_ident_start(c) {
                while self.peek().is_some_and(is_ident_part) {
                    self.bump();
                }
                let kind = if is_reserved(&self.src[start..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::NonKeyword
                };
                self.push(kind, start, line);
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.number();
                self.push(TokenKind::NonKeyword, start, line);
            } else if c == '"' || c == '\'' {
                self.quoted(c)?;
                self.push(TokenKind::NonKeyword, start, line);
            } else if let Some(sym) = SYMBOLS.iter().find(|s| self.src[self.pos..].starts_with(**s)) {
                self.pos += sym.len();
                self.push(TokenKind::Keyword, start, line);
            } else {
                return Err(self.error(format!("unexpected character {c:?}")));
            }
        }
        Ok(self.tokens)
    }

    fn number(&mut self) {
        if self.peek() == Some('0') && matches!(self.peek_at(1), Some('x' | 'X' | 'b' | 'B')) {
            self.bump();
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
                self.bump();
            }
        } else {
            while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                self.bump();
            }
            if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                    self.bump();
                }
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let sign = matches!(self.peek_at(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    for _ in 0..digit_at {
                        self.bump();
                    }
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                }
            }
        }
        if matches!(self.peek(), Some('l' | 'L' | 'f' | 'F' | 'd' | 'D')) {
            self.bump();
        }
    }

    fn quoted(&mut self, quote: char) -> Result<(), FrontendError> {
        let start = self.pos;
        let line = self.line;
        self.bump();
        loop {
            match self.bump() {
                Some('\\') => {
                    self.bump();
                }
                Some('\n') | None => {
                    return Err(FrontendError::Lex {
                        offset: start,
                        line,
                        message: "unterminated literal".into(),
                    })
                }
                Some(c) if c == quote => return Ok(()),
                Some(_) => {}
            }
        }
    }
}

/// Splits `source` into keyword and non-keyword tokens, dropping comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer { src: source, pos: 0, line: 1, tokens: Vec::new() }.run()
}

/// Replaces every comment with spaces, keeping newlines so line numbers hold.
pub fn strip_comments(source: &str) -> String {
    let bytes = source.as_bytes();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    let mut last = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => {
                let quote = bytes[i];
                i += 1;
                while i < bytes.len() && bytes[i] != quote && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                out.push_str(&source[last..i]);
                let end = source[i..].find('\n').map_or(bytes.len(), |e| i + e);
                out.extend(std::iter::repeat_n(' ', source[i..end].chars().count()));
                i = end;
                last = end;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                out.push_str(&source[last..i]);
                let end = source[i + 2..].find("*/").map_or(bytes.len(), |e| i + 2 + e + 2);
                for c in source[i..end].chars() {
                    out.push(if c == '\n' { '\n' } else { ' ' });
                }
                i = end;
                last = end;
            }
            _ => i += 1,
        }
    }
    out.push_str(&source[last.min(source.len())..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn reserved_words_sorted() {
        let mut sorted = RESERVED_WORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, RESERVED_WORDS);
    }

    #[test]
    fn assignment() {
        use TokenKind::*;
        assert_eq!(
            texts("x = 1;"),
            vec![
                (NonKeyword, "x".into()),
                (Keyword, "=".into()),
                (NonKeyword, "1".into()),
                (Keyword, ";".into())
            ]
        );
    }

    #[test]
    fn instanceof_is_keyword() {
        use TokenKind::*;
        assert_eq!(
            texts("view instanceof ViewGroup"),
            vec![
                (NonKeyword, "view".into()),
                (Keyword, "instanceof".into()),
                (NonKeyword, "ViewGroup".into())
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  // only a comment\n /* and another */ ").unwrap().is_empty());
    }

    #[test]
    fn literals_are_single_tokens() {
        let toks = texts(r#"s = "a b // c"; c = '\''; d = 0x1F + 1.5e-3f + .5;"#);
        let lits: Vec<_> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::NonKeyword)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(lits, vec!["s", "\"a b // c\"", "c", "'\\''", "d", "0x1F", "1.5e-3f", ".5"]);
    }

    #[test]
    fn greater_than_never_merges() {
        let toks = texts("a >> b >= c");
        let t: Vec<_> = toks.iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(t, vec!["a", ">", ">", "b", ">=", "c"]);
    }

    #[test]
    fn lex_error_reports_position() {
        match tokenize("x = `y`;") {
            Err(FrontendError::Lex { offset, line, .. }) => {
                assert_eq!(offset, 4);
                assert_eq!(line, 1);
            }
            other => panic!("expected lex error, got {other:?}"),
        }
    }

    #[test]
    fn concatenation_matches_stripped_source() {
        let src = "int a = 1; // one\n/* block */ a += f(a, \"s\");";
        let joined: String = tokenize(src).unwrap().iter().map(|t| t.text.as_str()).collect();
        let stripped: String = strip_comments(src).split_whitespace().collect();
        assert_eq!(joined, stripped);
    }

    #[test]
    fn strip_comments_keeps_lines() {
        let src = "a; // x\n/* y\n z */ b;";
        let out = strip_comments(src);
        assert_eq!(out.lines().count(), 3);
        assert!(out.contains("a;"));
        assert!(out.contains("b;"));
        assert!(!out.contains('x'));
    }
}
