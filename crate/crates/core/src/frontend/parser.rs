//! Recursive-descent parser producing simplified parse trees.
//!
//! Node shapes follow the usual Java grammar rules: every rule application
//! collects its immediate tokens and sub-results into a list, and single-element
//! lists collapse into their element. So `x > y.f` becomes
//! `["x", ">", ["y", ".", "f"]]` and `if (c) s;` becomes
//! `["if", ["(", c, ")"], s]` with label `if##`.

use super::lexer::{Token, TokenKind, LITERAL_WORDS, PRIMITIVE_TYPES};
use super::tree::{Element, Role, SimplifiedParseTree, TreeBuilder};
use super::FrontendError;

type PResult<T> = Result<T, FrontendError>;

const MODIFIERS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "synchronized", "native",
    "transient", "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<="];

fn binary_level(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 0,
        "&&" => 1,
        "|" => 2,
        "^" => 3,
        "&" => 4,
        "==" | "!=" => 5,
        "<" | ">" | "<=" | ">=" | "instanceof" => 6,
        "<<" | ">>" | ">>>" => 7,
        "+" | "-" => 8,
        "*" | "/" | "%" => 9,
        _ => return None,
    })
}

fn is_primitive(t: &Token) -> bool {
    t.kind == TokenKind::Keyword && PRIMITIVE_TYPES.contains(&t.text.as_str())
}

fn is_identifier(t: &Token) -> bool {
    t.kind == TokenKind::NonKeyword
        && t.text.starts_with(|c: char| c.is_alphabetic() || c == '_' || c == '$')
        && !LITERAL_WORDS.contains(&t.text.as_str())
}

pub(crate) struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    pub(crate) b: TreeBuilder,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(toks: &'t [Token]) -> Self {
        Self { toks, pos: 0, b: TreeBuilder::new() }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn nth(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn nth_is(&self, n: usize, text: &str) -> bool {
        self.nth(n).is_some_and(|t| t.is(text))
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error(&self, expected: &[&str]) -> FrontendError {
        let (offset, line, found) = match self.peek() {
            Some(t) => (t.span.offset, t.line, t.text.clone()),
            None => (
                self.toks.last().map_or(0, |t| t.span.end()),
                self.toks.last().map_or(1, |t| t.line),
                "end of input".to_string(),
            ),
        };
        FrontendError::Parse {
            offset,
            line,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn kw(&mut self, text: &str) -> PResult<Element> {
        if self.at(text) {
            self.pos += 1;
            Ok(Element::Keyword(text.to_string()))
        } else {
            Err(self.error(&[text]))
        }
    }

    fn take_kw(&mut self) -> Element {
        let t = &self.toks[self.pos];
        self.pos += 1;
        Element::Keyword(t.text.clone())
    }

    fn leaf(&mut self, role: Role) -> Element {
        let t = &self.toks[self.pos];
        self.pos += 1;
        self.b.leaf(t.text.clone(), role, Some(t.span), t.line)
    }

    fn ident(&mut self, role: Role) -> PResult<Element> {
        match self.peek() {
            Some(t) if is_identifier(t) => Ok(self.leaf(role)),
            _ => Err(self.error(&["identifier"])),
        }
    }

    /// Adjacent `>` tokens forming a shift or compound assignment operator.
    /// Returns the operator text and the number of tokens it spans.
    fn gt_compound(&self) -> Option<(&'static str, usize)> {
        let adjacent = |a: &Token, b: &Token| a.span.end() == b.span.offset;
        let t0 = self.peek().filter(|t| t.is(">"))?;
        let t1 = self.nth(1).filter(|t| adjacent(t0, t))?;
        if t1.is(">=") {
            return Some((">>=", 2));
        }
        if !t1.is(">") {
            return None;
        }
        match self.nth(2).filter(|t| adjacent(t1, t)) {
            Some(t2) if t2.is(">=") => Some((">>>=", 3)),
            Some(t2) if t2.is(">") => Some((">>>", 3)),
            _ => Some((">>", 2)),
        }
    }

    fn take_n_kw(&mut self, n: usize) -> Vec<Element> {
        (0..n).map(|_| self.take_kw()).collect()
    }

    // ---- blocks and statements -------------------------------------------

    pub(crate) fn block(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("{")?];
        while !self.at("}") {
            if self.at_end() {
                return Err(self.error(&["}"]));
            }
            els.push(self.block_statement()?);
        }
        els.push(self.kw("}")?);
        Ok(self.b.scope_node(els))
    }

    pub(crate) fn block_statement(&mut self) -> PResult<Element> {
        if self.local_decl_ahead() {
            let decl = self.local_var_decl()?;
            let semi = self.kw(";")?;
            return Ok(self.b.node(vec![decl, semi]));
        }
        self.statement()
    }

    fn local_decl_ahead(&mut self) -> bool {
        match self.peek() {
            Some(t) if t.is("final") || t.is("@") => return true,
            Some(t) if is_primitive(t) => return !self.nth_is(1, "."),
            Some(t) if is_identifier(t) => {}
            _ => return false,
        }
        let mark = self.b.mark();
        let pos = self.pos;
        let ok = self.ty().is_ok()
            && self.peek().is_some_and(is_identifier)
            && self.nth(1).is_some_and(|t| {
                t.is("=") || t.is(";") || t.is(",") || t.is("[") || t.is(":")
            });
        self.pos = pos;
        self.b.reset(mark);
        ok
    }

    fn modifiers(&mut self, els: &mut Vec<Element>) -> PResult<()> {
        loop {
            if self.at("@") && !self.nth_is(1, "interface") {
                els.push(self.annotation()?);
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str())) {
                els.push(self.take_kw());
            } else {
                return Ok(());
            }
        }
    }

    fn annotation(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("@")?];
        els.push(self.qualified_name(Role::Type)?);
        if self.at("(") {
            els.push(self.kw("(")?);
            if !self.at(")") {
                els.push(self.expression_list()?);
            }
            els.push(self.kw(")")?);
        }
        Ok(self.b.node(els))
    }

    fn qualified_name(&mut self, role: Role) -> PResult<Element> {
        let mut els = vec![self.ident(role)?];
        while self.at(".") && self.nth(1).is_some_and(is_identifier) {
            els.push(self.take_kw());
            els.push(self.ident(role)?);
        }
        Ok(self.b.node(els))
    }

    fn local_var_decl(&mut self) -> PResult<Element> {
        let mut els = Vec::new();
        self.modifiers(&mut els)?;
        els.push(self.ty()?);
        els.push(self.declarators()?);
        Ok(self.b.node(els))
    }

    fn declarators(&mut self) -> PResult<Element> {
        let mut els = vec![self.declarator()?];
        while self.at(",") {
            els.push(self.take_kw());
            els.push(self.declarator()?);
        }
        Ok(self.b.node(els))
    }

    fn declarator(&mut self) -> PResult<Element> {
        let mut els = vec![self.ident(Role::Declaration)?];
        while self.at("[") && self.nth_is(1, "]") {
            els.extend(self.take_n_kw(2));
        }
        if self.at("=") {
            els.push(self.take_kw());
            els.push(self.variable_initializer()?);
        }
        Ok(self.b.node(els))
    }

    fn variable_initializer(&mut self) -> PResult<Element> {
        if self.at("{") {
            self.array_initializer()
        } else {
            self.expression()
        }
    }

    fn array_initializer(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("{")?];
        while !self.at("}") {
            els.push(self.variable_initializer()?);
            if self.at(",") {
                els.push(self.take_kw());
            } else {
                break;
            }
        }
        els.push(self.kw("}")?);
        Ok(self.b.node(els))
    }

    /// `type := (primitive | Name typeArgs? ('.' Name typeArgs?)*) ('[' ']')*`
    fn ty(&mut self) -> PResult<Element> {
        let base = self.type_without_dims()?;
        let mut els = vec![base];
        while self.at("[") && self.nth_is(1, "]") {
            els.extend(self.take_n_kw(2));
        }
        Ok(self.b.node(els))
    }

    fn type_without_dims(&mut self) -> PResult<Element> {
        if self.peek().is_some_and(is_primitive) {
            return Ok(self.take_kw());
        }
        let mut els = vec![self.ident(Role::Type)?];
        if self.at("<") {
            els.push(self.type_arguments()?);
        }
        while self.at(".") && self.nth(1).is_some_and(is_identifier) {
            els.push(self.take_kw());
            els.push(self.ident(Role::Type)?);
            if self.at("<") {
                els.push(self.type_arguments()?);
            }
        }
        Ok(self.b.node(els))
    }

    fn type_arguments(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("<")?];
        if !self.at(">") {
            loop {
                els.push(self.type_argument()?);
                if self.at(",") {
                    els.push(self.take_kw());
                } else {
                    break;
                }
            }
        }
        els.push(self.kw(">")?);
        Ok(self.b.node(els))
    }

    fn type_argument(&mut self) -> PResult<Element> {
        if self.at("?") {
            let mut els = vec![self.take_kw()];
            if self.at("extends") || self.at("super") {
                els.push(self.take_kw());
                els.push(self.ty()?);
            }
            return Ok(self.b.node(els));
        }
        self.ty()
    }

    fn par_expression(&mut self) -> PResult<Element> {
        let open = self.kw("(")?;
        let e = self.expression()?;
        let close = self.kw(")")?;
        Ok(self.b.node(vec![open, e, close]))
    }

    fn statement(&mut self) -> PResult<Element> {
        let Some(t) = self.peek() else {
            return Err(self.error(&["statement"]));
        };
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "{" => return self.block(),
                "if" => {
                    let mut els = vec![self.take_kw(), self.par_expression()?, self.statement()?];
                    if self.at("else") {
                        els.push(self.take_kw());
                        els.push(self.statement()?);
                    }
                    return Ok(self.b.node(els));
                }
                "for" => return self.for_statement(),
                "while" => {
                    let els = vec![self.take_kw(), self.par_expression()?, self.statement()?];
                    return Ok(self.b.node(els));
                }
                "do" => {
                    let mut els = vec![self.take_kw(), self.statement()?];
                    els.push(self.kw("while")?);
                    els.push(self.par_expression()?);
                    els.push(self.kw(";")?);
                    return Ok(self.b.node(els));
                }
                "try" => return self.try_statement(),
                "switch" => return self.switch_statement(),
                "synchronized" => {
                    let els = vec![self.take_kw(), self.par_expression()?, self.block()?];
                    return Ok(self.b.node(els));
                }
                "return" => {
                    let mut els = vec![self.take_kw()];
                    if !self.at(";") {
                        els.push(self.expression()?);
                    }
                    els.push(self.kw(";")?);
                    return Ok(self.b.node(els));
                }
                "throw" => {
                    let els = vec![self.take_kw(), self.expression()?, self.kw(";")?];
                    return Ok(self.b.node(els));
                }
                "break" | "continue" => {
                    let mut els = vec![self.take_kw()];
                    if self.peek().is_some_and(is_identifier) {
                        els.push(self.leaf(Role::Other));
                    }
                    els.push(self.kw(";")?);
                    return Ok(self.b.node(els));
                }
                "assert" => {
                    let mut els = vec![self.take_kw(), self.expression()?];
                    if self.at(":") {
                        els.push(self.take_kw());
                        els.push(self.expression()?);
                    }
                    els.push(self.kw(";")?);
                    return Ok(self.b.node(els));
                }
                ";" => return Ok(self.take_kw()),
                _ => {}
            }
        } else if is_identifier(t) && self.nth_is(1, ":") {
            let els = vec![self.leaf(Role::Other), self.take_kw(), self.statement()?];
            return Ok(self.b.node(els));
        }
        let e = self.expression()?;
        let semi = self.kw(";")?;
        Ok(self.b.node(vec![e, semi]))
    }

    fn for_statement(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("for")?, self.kw("(")?];
        els.push(self.for_control()?);
        els.push(self.kw(")")?);
        els.push(self.statement()?);
        Ok(self.b.scope_node(els))
    }

    fn for_control(&mut self) -> PResult<Element> {
        if let Some(enhanced) = self.try_enhanced_for_control()? {
            return Ok(enhanced);
        }
        let mut els = Vec::new();
        if !self.at(";") {
            if self.local_decl_ahead() {
                els.push(self.local_var_decl()?);
            } else {
                els.push(self.expression_list()?);
            }
        }
        els.push(self.kw(";")?);
        if !self.at(";") {
            els.push(self.expression()?);
        }
        els.push(self.kw(";")?);
        if !self.at(")") {
            els.push(self.expression_list()?);
        }
        Ok(self.b.node(els))
    }

    fn try_enhanced_for_control(&mut self) -> PResult<Option<Element>> {
        let mark = self.b.mark();
        let pos = self.pos;
        let attempt = (|| -> PResult<Element> {
            let mut decl = Vec::new();
            self.modifiers(&mut decl)?;
            decl.push(self.ty()?);
            decl.push(self.ident(Role::Declaration)?);
            let colon = self.kw(":")?;
            let decl = self.b.node(decl);
            let e = self.expression()?;
            Ok(self.b.node(vec![decl, colon, e]))
        })();
        match attempt {
            Ok(e) => Ok(Some(e)),
            Err(_) => {
                self.pos = pos;
                self.b.reset(mark);
                Ok(None)
            }
        }
    }

    fn try_statement(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("try")?];
        let has_resources = self.at("(");
        if has_resources {
            let mut res = vec![self.take_kw()];
            while !self.at(")") {
                let mut r = Vec::new();
                self.modifiers(&mut r)?;
                r.push(self.ty()?);
                r.push(self.ident(Role::Declaration)?);
                r.push(self.kw("=")?);
                r.push(self.expression()?);
                res.push(self.b.node(r));
                if self.at(";") {
                    res.push(self.take_kw());
                } else {
                    break;
                }
            }
            res.push(self.kw(")")?);
            els.push(self.b.node(res));
        }
        els.push(self.block()?);
        // A bare `try` block is accepted: partial queries often stop before
        // the handlers.
        while self.at("catch") {
            els.push(self.catch_clause()?);
        }
        if self.at("finally") {
            let f = vec![self.take_kw(), self.block()?];
            els.push(self.b.node(f));
        }
        Ok(self.b.scope_node(els))
    }

    fn catch_clause(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("catch")?, self.kw("(")?];
        let mut param = Vec::new();
        self.modifiers(&mut param)?;
        let mut types = vec![self.ty()?];
        while self.at("|") {
            types.push(self.take_kw());
            types.push(self.ty()?);
        }
        param.push(self.b.node(types));
        param.push(self.ident(Role::Declaration)?);
        els.push(self.b.node(param));
        els.push(self.kw(")")?);
        els.push(self.block()?);
        Ok(self.b.scope_node(els))
    }

    fn switch_statement(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("switch")?, self.par_expression()?];
        let mut body = vec![self.kw("{")?];
        while !self.at("}") {
            let mut group = Vec::new();
            if self.at("case") {
                group.push(self.take_kw());
                group.push(self.expression()?);
            } else if self.at("default") {
                group.push(self.take_kw());
            } else {
                return Err(self.error(&["case", "default", "}"]));
            }
            group.push(self.kw(":")?);
            while !self.at("case") && !self.at("default") && !self.at("}") {
                if self.at_end() {
                    return Err(self.error(&["}"]));
                }
                group.push(self.block_statement()?);
            }
            body.push(self.b.node(group));
        }
        body.push(self.kw("}")?);
        els.push(self.b.scope_node(body));
        Ok(self.b.node(els))
    }

    // ---- expressions -------------------------------------------------------

    fn expression_list(&mut self) -> PResult<Element> {
        let mut els = vec![self.expression()?];
        while self.at(",") {
            els.push(self.take_kw());
            els.push(self.expression()?);
        }
        Ok(self.b.node(els))
    }

    pub(crate) fn expression(&mut self) -> PResult<Element> {
        let lhs = self.ternary()?;
        let op = if let Some((_, n)) = self.gt_compound().filter(|(op, _)| op.ends_with('=')) {
            Some(self.take_n_kw(n))
        } else if self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && ASSIGN_OPS.contains(&t.text.as_str())) {
            Some(vec![self.take_kw()])
        } else {
            None
        };
        match op {
            Some(op) => {
                let rhs = self.expression()?;
                let mut els = vec![lhs];
                els.extend(op);
                els.push(rhs);
                Ok(self.b.node(els))
            }
            None => Ok(lhs),
        }
    }

    fn ternary(&mut self) -> PResult<Element> {
        let cond = self.binary(0)?;
        if !self.at("?") {
            return Ok(cond);
        }
        let q = self.take_kw();
        let a = self.expression()?;
        let colon = self.kw(":")?;
        let b = self.ternary()?;
        Ok(self.b.node(vec![cond, q, a, colon, b]))
    }

    fn peek_binary(&self) -> Option<(Vec<&'static str>, u8)> {
        if let Some((op, n)) = self.gt_compound() {
            if op.ends_with('=') {
                return None;
            }
            return Some((vec![">"; n], 7));
        }
        let t = self.peek().filter(|t| t.kind == TokenKind::Keyword)?;
        let level = binary_level(&t.text)?;
        Some((Vec::new(), level))
    }

    fn binary(&mut self, min_level: u8) -> PResult<Element> {
        let mut lhs = self.unary()?;
        while let Some((gt, level)) = self.peek_binary() {
            if level < min_level {
                break;
            }
            let mut els = vec![lhs];
            let is_instanceof = self.at("instanceof");
            if gt.is_empty() {
                els.push(self.take_kw());
            } else {
                els.extend(self.take_n_kw(gt.len()));
            }
            if is_instanceof {
                let mut target = vec![self.ty()?];
                if self.peek().is_some_and(is_identifier) {
                    target.push(self.ident(Role::Declaration)?);
                }
                els.push(self.b.node(target));
            } else {
                els.push(self.binary(level + 1)?);
            }
            lhs = self.b.node(els);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Element> {
        let Some(t) = self.peek() else {
            return Err(self.error(&["expression"]));
        };
        if t.kind == TokenKind::Keyword && matches!(t.text.as_str(), "+" | "-" | "++" | "--" | "!" | "~") {
            let op = self.take_kw();
            let e = self.unary()?;
            return Ok(self.b.node(vec![op, e]));
        }
        if t.is("(") && self.cast_ahead() {
            let open = self.take_kw();
            let ty = self.ty()?;
            let close = self.kw(")")?;
            let e = self.unary()?;
            return Ok(self.b.node(vec![open, ty, close, e]));
        }
        let mut e = self.primary()?;
        e = self.selectors(e)?;
        while self.at("++") || self.at("--") {
            let op = self.take_kw();
            e = self.b.node(vec![e, op]);
        }
        Ok(e)
    }

    fn cast_ahead(&mut self) -> bool {
        let mark = self.b.mark();
        let pos = self.pos;
        self.pos += 1;
        let primitive = self.peek().is_some_and(is_primitive);
        let ok = self.ty().is_ok() && self.at(")") && {
            if primitive {
                true
            } else {
                self.nth(1).is_some_and(|t| {
                    t.kind == TokenKind::NonKeyword
                        || matches!(
                            t.text.as_str(),
                            "(" | "!" | "~" | "this" | "super" | "new"
                        )
                })
            }
        };
        self.pos = pos;
        self.b.reset(mark);
        ok
    }

    fn arguments(&mut self, els: &mut Vec<Element>) -> PResult<()> {
        els.push(self.kw("(")?);
        if !self.at(")") {
            els.push(self.expression_list()?);
        }
        els.push(self.kw(")")?);
        Ok(())
    }

    fn primary(&mut self) -> PResult<Element> {
        let Some(t) = self.peek() else {
            return Err(self.error(&["expression"]));
        };
        if t.kind == TokenKind::NonKeyword {
            if !is_identifier(t) {
                return Ok(self.leaf(Role::Literal));
            }
            if self.nth_is(1, "(") {
                let mut els = vec![self.leaf(Role::Callee)];
                self.arguments(&mut els)?;
                return Ok(self.b.node(els));
            }
            return Ok(self.leaf(Role::Name));
        }
        match t.text.as_str() {
            "(" => self.par_expression(),
            "this" | "super" => {
                let kw = self.take_kw();
                if self.at("(") {
                    let mut els = vec![kw];
                    self.arguments(&mut els)?;
                    return Ok(self.b.node(els));
                }
                Ok(kw)
            }
            "new" => self.creator(),
            _ if is_primitive(t) || t.is("void") => {
                let mut els = vec![self.ty()?];
                els.push(self.kw(".")?);
                els.push(self.kw("class")?);
                Ok(self.b.node(els))
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn selectors(&mut self, mut e: Element) -> PResult<Element> {
        loop {
            if self.at(".") {
                let dot = self.take_kw();
                let Some(t) = self.peek() else {
                    return Err(self.error(&["identifier"]));
                };
                let rhs = if is_identifier(t) {
                    if self.nth_is(1, "(") {
                        let mut call = vec![self.leaf(Role::Callee)];
                        self.arguments(&mut call)?;
                        self.b.node(call)
                    } else {
                        self.leaf(Role::Member)
                    }
                } else if t.is("class") || t.is("this") {
                    self.take_kw()
                } else if t.is("new") {
                    self.creator()?
                } else {
                    return Err(self.error(&["identifier"]));
                };
                e = self.b.node(vec![e, dot, rhs]);
            } else if self.at("[") {
                let open = self.take_kw();
                let idx = self.expression()?;
                let close = self.kw("]")?;
                e = self.b.node(vec![e, open, idx, close]);
            } else {
                return Ok(e);
            }
        }
    }

    fn creator(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("new")?];
        els.push(self.type_without_dims()?);
        if self.at("[") {
            let mut sized = false;
            while self.at("[") {
                els.push(self.take_kw());
                if !self.at("]") {
                    els.push(self.expression()?);
                    sized = true;
                }
                els.push(self.kw("]")?);
            }
            if !sized {
                els.push(self.array_initializer()?);
            }
            return Ok(self.b.node(els));
        }
        self.arguments(&mut els)?;
        if self.at("{") {
            els.push(self.class_body()?);
        }
        Ok(self.b.node(els))
    }

    /// Body of an anonymous class: fields and methods.
    fn class_body(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("{")?];
        while !self.at("}") {
            if self.at_end() {
                return Err(self.error(&["}"]));
            }
            if self.at(";") {
                els.push(self.take_kw());
                continue;
            }
            els.push(self.member()?);
        }
        els.push(self.kw("}")?);
        Ok(self.b.scope_node(els))
    }

    fn member(&mut self) -> PResult<Element> {
        let mut els = Vec::new();
        self.modifiers(&mut els)?;
        if self.at("{") {
            els.push(self.block()?);
            return Ok(self.b.node(els));
        }
        if self.at("void") {
            els.push(self.take_kw());
        } else {
            els.push(self.ty()?);
        }
        if self.peek().is_some_and(is_identifier) && self.nth_is(1, "(") {
            els.push(self.leaf(Role::Other));
            els.push(self.formal_parameters()?);
            if self.at("throws") {
                els.push(self.take_kw());
                let mut types = vec![self.ty()?];
                while self.at(",") {
                    types.push(self.take_kw());
                    types.push(self.ty()?);
                }
                els.push(self.b.node(types));
            }
            if self.at(";") {
                els.push(self.take_kw());
            } else {
                els.push(self.block()?);
            }
            return Ok(self.b.scope_node(els));
        }
        els.push(self.declarators()?);
        els.push(self.kw(";")?);
        Ok(self.b.node(els))
    }

    fn formal_parameters(&mut self) -> PResult<Element> {
        let mut els = vec![self.kw("(")?];
        while !self.at(")") {
            let mut p = Vec::new();
            self.modifiers(&mut p)?;
            p.push(self.ty()?);
            if self.at("...") {
                p.push(self.take_kw());
            }
            p.push(self.ident(Role::Declaration)?);
            els.push(self.b.node(p));
            if self.at(",") {
                els.push(self.take_kw());
            } else {
                break;
            }
        }
        els.push(self.kw(")")?);
        Ok(self.b.node(els))
    }

    pub(crate) fn expect_end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }
}

/// Parses a method body: a `{ ... }` block that spans all of `tokens`.
pub fn parse_block(tokens: &[Token]) -> Result<SimplifiedParseTree, FrontendError> {
    let mut p = Parser::new(tokens);
    let root = p.block()?;
    p.expect_end()?;
    Ok(p.b.finish(root))
}

/// Parses a snippet: a sequence of block statements, or a lone expression.
/// Several statements become the children of the root list; a single
/// statement is the root itself.
pub fn parse_snippet(tokens: &[Token]) -> Result<SimplifiedParseTree, FrontendError> {
    if tokens.is_empty() {
        return Err(FrontendError::EmptySnippet);
    }
    let mut p = Parser::new(tokens);
    let statements = (|| {
        let mut els = Vec::new();
        while !p.at_end() {
            els.push(p.block_statement()?);
        }
        Ok::<_, FrontendError>(els)
    })();
    match statements {
        Ok(els) => {
            let root = p.b.node(els);
            Ok(p.b.finish(root))
        }
        Err(stmt_err) => {
            let mut p = Parser::new(tokens);
            match p.expression().and_then(|e| p.expect_end().map(|_| e)) {
                Ok(e) => Ok(p.b.finish(e)),
                Err(_) => Err(stmt_err),
            }
        }
    }
}

/// Parses either a method body (when the tokens are one brace-delimited
/// block) or a snippet.
pub fn parse_method(tokens: &[Token]) -> Result<SimplifiedParseTree, FrontendError> {
    if tokens.first().is_some_and(|t| t.is("{")) {
        if let Ok(tree) = parse_block(tokens) {
            return Ok(tree);
        }
    }
    parse_snippet(tokens)
}
