//! Statement-level reduction of pruned trees and pretty printing.

use serde::{Deserialize, Serialize};

use crate::frontend::{Element, LeafId, NodeId, SimplifiedParseTree};

pub const PLACEHOLDER: &str = "// your code...";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Markup {
    /// Text only.
    #[default]
    Plain,
    /// Lines holding highlighted tokens start with `+ `, others with two spaces.
    Lines,
    /// Highlighted tokens in bold yellow.
    Ansi,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    pub placeholders: bool,
}

/// Byte range of a highlighted token within a rendered snippet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Keyword(String),
    Leaf(LeafId),
    Placeholder,
}

/// A tree reduced to the statements holding retained leaves.
///
/// Inside blocks, statement lists and switch groups, a statement with no
/// retained leaf is dropped; every other element of a kept statement is kept.
/// The outer braces of a method body are omitted.
#[derive(Debug, Clone)]
pub struct Reduced {
    items: Vec<Item>,
}

impl Reduced {
    pub fn new(tree: &SimplifiedParseTree, retained: &[bool]) -> Self {
        let mut has = vec![false; tree.nodes().len()];
        // Children have larger ids than their parents only for builder-made
        // trees, so compute bottom-up through explicit recursion.
        // With every leaf retained, keyword-only statements such as `break;` stay too.
        let full = retained.iter().all(|&r| r);
        fn mark(t: &SimplifiedParseTree, id: NodeId, retained: &[bool], full: bool, has: &mut [bool]) -> bool {
            let mut any = false;
            for e in &t.node(id).elements {
                any |= match e {
                    Element::Keyword(_) => full,
                    Element::Leaf(l) => retained[*l as usize],
                    Element::Node(n) => mark(t, *n, retained, full, has),
                };
            }
            has[id as usize] = any;
            any
        }
        mark(tree, tree.root(), retained, full, &mut has);
        let mut r = Builder { tree, retained, has, items: Vec::new() };
        let root = tree.root();
        let els = &tree.node(root).elements;
        if is_block(els) {
            r.units(&els[1..els.len() - 1]);
        } else {
            r.node(root);
        }
        Self { items: r.items }
    }

    /// Leaves that appear in the reduced tree, in order.
    pub fn leaves(&self) -> Vec<LeafId> {
        self.items.iter().filter_map(|i| if let Item::Leaf(l) = i { Some(*l) } else { None }).collect()
    }

    /// In-order tokens, with `None` marking a placeholder slot.
    pub fn tokens<'a>(&'a self, tree: &'a SimplifiedParseTree) -> Vec<Option<&'a str>> {
        self.items
            .iter()
            .map(|i| match i {
                Item::Keyword(k) => Some(k.as_str()),
                Item::Leaf(l) => Some(tree.leaf(*l).text.as_str()),
                Item::Placeholder => None,
            })
            .collect()
    }

    /// Pretty prints the reduced tree; `extra` marks leaves to highlight.
    pub fn render(&self, tree: &SimplifiedParseTree, extra: &dyn Fn(LeafId) -> bool, opts: RenderOptions) -> (String, Vec<Highlight>) {
        let mut p = Printer::default();
        let toks: Vec<Tok> = self
            .items
            .iter()
            .filter(|i| opts.placeholders || **i != Item::Placeholder)
            .map(|i| match i {
                Item::Keyword(k) => Tok { text: k, keyword: true, hl: false, placeholder: false },
                Item::Leaf(l) => Tok { text: &tree.leaf(*l).text, keyword: false, hl: extra(*l), placeholder: false },
                Item::Placeholder => Tok { text: PLACEHOLDER, keyword: false, hl: true, placeholder: true },
            })
            .collect();
        p.run(&toks);
        p.finish()
    }
}

fn is_block(els: &[Element]) -> bool {
    els.len() >= 2
        && matches!(&els[0], Element::Keyword(k) if k == "{")
        && matches!(els.last(), Some(Element::Keyword(k)) if k == "}")
}

fn is_statement_list(els: &[Element]) -> bool {
    els.len() >= 2 && els.iter().all(|e| matches!(e, Element::Node(_)))
}

/// Index of the `:` ending a switch label, if `els` is a switch group.
fn switch_group(els: &[Element]) -> Option<usize> {
    match &els[0] {
        Element::Keyword(k) if k == "case" || k == "default" => {
            els.iter().position(|e| matches!(e, Element::Keyword(k) if k == ":"))
        }
        _ => None,
    }
}

struct Builder<'a> {
    tree: &'a SimplifiedParseTree,
    retained: &'a [bool],
    has: Vec<bool>,
    items: Vec<Item>,
}

impl Builder<'_> {
    fn node(&mut self, id: NodeId) {
        let els = &self.tree.node(id).elements;
        if is_block(els) {
            self.items.push(Item::Keyword("{".into()));
            self.units(&els[1..els.len() - 1]);
            self.items.push(Item::Keyword("}".into()));
        } else if is_statement_list(els) {
            self.units(els);
        } else if let Some(colon) = switch_group(els) {
            for e in &els[..=colon] {
                self.element(e);
            }
            self.units(&els[colon + 1..]);
        } else {
            for e in els {
                self.element(e);
            }
        }
    }

    fn element(&mut self, e: &Element) {
        match e {
            Element::Keyword(k) => self.items.push(Item::Keyword(k.clone())),
            Element::Leaf(l) => self.items.push(Item::Leaf(*l)),
            Element::Node(n) => self.node(*n),
        }
    }

    fn units(&mut self, els: &[Element]) {
        let mut dropped_run = false;
        for e in els {
            let keep = match e {
                Element::Keyword(_) => true,
                Element::Leaf(l) => self.retained[*l as usize],
                Element::Node(n) => self.has[*n as usize],
            };
            if keep {
                self.element(e);
                dropped_run = false;
            } else if !dropped_run {
                self.items.push(Item::Placeholder);
                dropped_run = true;
            }
        }
    }
}

struct Tok<'a> {
    text: &'a str,
    keyword: bool,
    hl: bool,
    placeholder: bool,
}

#[derive(Default)]
struct Printer {
    lines: Vec<(usize, String, Vec<Highlight>)>,
    line: String,
    spans: Vec<Highlight>,
    indent: usize,
    parens: usize,
    /// Open `<` of generic type arguments.
    generics: usize,
}

const OPERAND_KEYWORDS: &[&str] = &["this", "super", "class"];

fn is_word(t: &Tok) -> bool {
    !t.keyword || t.text.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Tokens never followed by a space.
fn glue_after(t: &Tok) -> bool {
    t.keyword && matches!(t.text, "(" | "[" | "." | "@" | "!" | "~" | "::")
}

fn ends_operand(t: &Tok) -> bool {
    !t.keyword || OPERAND_KEYWORDS.contains(&t.text) || matches!(t.text, ")" | "]")
}

/// Whether the `<` at `i` opens type arguments rather than comparing.
fn opens_generic(toks: &[Tok], i: usize) -> bool {
    let starts_type = i > 0
        && ((!toks[i - 1].keyword && toks[i - 1].text.starts_with(|c: char| c.is_uppercase())) || toks[i - 1].text == ".");
    if !starts_type {
        return false;
    }
    let mut depth = 0;
    for t in &toks[i..] {
        match t.text {
            "<" if t.keyword => depth += 1,
            ">" if t.keyword => {
                depth -= 1;
                if depth == 0 {
                    return true;
                }
            }
            "," | "?" | "extends" | "super" | "[" | "]" | "." | "&" => {}
            _ if !t.keyword || is_word(t) => {}
            _ => return false,
        }
    }
    false
}

impl Printer {
    fn newline(&mut self) {
        if !self.line.is_empty() {
            let line = std::mem::take(&mut self.line);
            let spans = std::mem::take(&mut self.spans);
            self.lines.push((self.indent, line, spans));
        }
    }

    fn push(&mut self, text: &str, space: bool, hl: bool) {
        if space && !self.line.is_empty() {
            self.line.push(' ');
        }
        let start = self.line.len();
        self.line.push_str(text);
        if hl {
            self.spans.push(Highlight { start, end: self.line.len() });
        }
    }

    fn run(&mut self, toks: &[Tok]) {
        let mut generic_closers = 0usize;
        // Parentheses open around a class body, as in `f(new T() { ... })`.
        let mut outer_parens = Vec::new();
        for (i, t) in toks.iter().enumerate() {
            let prev = i.checked_sub(1).map(|j| &toks[j]);
            let next = toks.get(i + 1);
            if t.placeholder {
                self.newline();
                self.push(t.text, false, t.hl);
                self.newline();
                continue;
            }
            if !t.keyword {
                let space = prev.is_some_and(|p| {
                    !glue_after(p)
                        && !(p.keyword && p.text == "<" && self.generics > 0)
                        && !(p.keyword && matches!(p.text, "-" | "+" | "++" | "--") && is_unary(toks, i - 1))
                });
                self.push(t.text, space, t.hl);
                continue;
            }
            match t.text {
                "{" => {
                    self.push("{", true, t.hl);
                    self.newline();
                    self.indent += 1;
                    outer_parens.push(std::mem::take(&mut self.parens));
                }
                "}" => {
                    self.newline();
                    self.indent = self.indent.saturating_sub(1);
                    self.parens = outer_parens.pop().unwrap_or(0);
                    self.push("}", false, t.hl);
                    let joins = next.is_some_and(|n| {
                        n.keyword && matches!(n.text, "else" | "catch" | "finally" | "while" | ")" | ";" | ",")
                    });
                    if !joins {
                        self.newline();
                    }
                }
                ";" => {
                    self.push(";", false, t.hl);
                    if self.parens == 0 {
                        self.newline();
                    }
                }
                "(" => {
                    let space = prev.is_some_and(|p| {
                        !(is_word(p) && !matches!(p.text, "if" | "for" | "while" | "switch" | "catch" | "synchronized" | "return" | "new" | "throw" | "try" | "assert" | "else" | "case")
                            || matches!(p.text, "(" | "[" | "." | ">" | "!" | "~" | "@" | "]")
                            || (p.keyword && matches!(p.text, "-" | "+") && is_unary(toks, i - 1)))
                    });
                    self.push("(", space, t.hl);
                    self.parens += 1;
                }
                ")" => {
                    self.push(")", false, t.hl);
                    self.parens = self.parens.saturating_sub(1);
                }
                "<" if opens_generic(toks, i) => {
                    self.push("<", false, t.hl);
                    self.generics += 1;
                    generic_closers += 1;
                }
                ">" if generic_closers > 0 => {
                    self.push(">", false, t.hl);
                    self.generics -= 1;
                    generic_closers -= 1;
                }
                "." | "," | "]" | "[" | "::" => self.push(t.text, false, t.hl),
                ":" => {
                    let label = self.line.starts_with("case ") || self.line.starts_with("default");
                    self.push(":", !label, t.hl);
                }
                "++" | "--" if prev.is_some_and(ends_operand) => self.push(t.text, false, t.hl),
                "@" => self.push("@", true, t.hl),
                _ => {
                    let space = prev.is_some_and(|p| {
                        !glue_after(p)
                            && !(p.keyword && matches!(p.text, "-" | "+" | "++" | "--") && is_unary(toks, i - 1))
                            && !(p.keyword && p.text == "<" && self.generics > 0)
                    });
                    self.push(t.text, space, t.hl);
                }
            }
        }
        self.newline();
    }

    fn finish(self) -> (String, Vec<Highlight>) {
        let mut out = String::new();
        let mut all = Vec::new();
        for (indent, line, spans) in self.lines {
            for _ in 0..indent {
                out.push_str("    ");
            }
            let base = out.len();
            out.push_str(&line);
            all.extend(spans.iter().map(|s| Highlight { start: base + s.start, end: base + s.end }));
            out.push('\n');
        }
        out.pop();
        (out, all)
    }
}

/// Applies `markup` to a rendered snippet.
pub fn apply_markup(snippet: &str, highlights: &[Highlight], markup: Markup) -> String {
    let mut out = String::new();
    let mut pos = 0;
    for line in snippet.split('\n') {
        let (a, b) = (pos, pos + line.len());
        let spans: Vec<_> = highlights.iter().filter(|h| h.start >= a && h.end <= b).collect();
        match markup {
            Markup::Plain => out.push_str(line),
            Markup::Lines => {
                out.push_str(if spans.is_empty() { "  " } else { "+ " });
                out.push_str(line);
            }
            Markup::Ansi => {
                let mut last = a;
                for h in spans {
                    out.push_str(&snippet[last..h.start]);
                    out.push_str("\x1b[1;33m");
                    out.push_str(&snippet[h.start..h.end]);
                    out.push_str("\x1b[0m");
                    last = h.end;
                }
                out.push_str(&snippet[last..b]);
            }
        }
        out.push('\n');
        pos = b + 1;
    }
    out.pop();
    out
}

/// Whether the operator at `i` is a prefix operator.
fn is_unary(toks: &[Tok], i: usize) -> bool {
    match i.checked_sub(1) {
        None => true,
        Some(j) => !ends_operand(&toks[j]) && !(toks[j].keyword && matches!(toks[j].text, "++" | "--") && ends_operand_before(toks, j)),
    }
}

fn ends_operand_before(toks: &[Tok], j: usize) -> bool {
    j.checked_sub(1).is_some_and(|k| ends_operand(&toks[k]))
}
