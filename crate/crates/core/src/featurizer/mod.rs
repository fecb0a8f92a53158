//! Structural features of annotated trees.
//!
//! Every non-keyword token `n` contributes a token feature, up to three parent
//! features, up to two sibling features and, for locals, up to two variable
//! usage features. Local variable names are replaced by `#VAR`.

pub mod multiset;
pub mod symbols;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::{AnnotatedTree, LeafId, NodeId};
pub use multiset::{sim_score, Multiset};
pub use symbols::{Interner, Overlay, Sym, Symbols, VAR, VAR_TEXT};

/// Label text of member access nodes, whose locals take a token context.
pub const MEMBER_ACCESS_LABEL: &str = "#.#";

/// How many ancestors a leaf reports through parent features.
pub const PARENT_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Context {
    /// `(i, L(t))`: the usage is the `i`-th child of a node labeled `L(t)`.
    Positional(u32, Sym),
    /// The first non-local token below a member access node.
    Token(Sym),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Token(Sym),
    /// `(n, i, L(t))`.
    Parent(Sym, u32, Sym),
    /// `(Prev(n), n)` or `(n, Next(n))`.
    Sibling(Sym, Sym),
    /// `(C(PrevUse(n)), C(n))` or `(C(n), C(NextUse(n)))`.
    VarUsage(Context, Context),
}

impl Feature {
    /// The same feature with every symbol passed through `map`.
    pub fn map_syms(self, map: impl Fn(Sym) -> Sym) -> Feature {
        let ctx = |c: Context| match c {
            Context::Positional(i, l) => Context::Positional(i, map(l)),
            Context::Token(t) => Context::Token(map(t)),
        };
        match self {
            Feature::Token(t) => Feature::Token(map(t)),
            Feature::Parent(t, i, l) => Feature::Parent(map(t), i, map(l)),
            Feature::Sibling(a, b) => Feature::Sibling(map(a), map(b)),
            Feature::VarUsage(a, b) => Feature::VarUsage(ctx(a), ctx(b)),
        }
    }

    /// Renders a feature with resolved symbols, e.g. `(#VAR, 2, (#)#)`.
    pub fn display<'a>(&'a self, syms: &'a dyn Symbols) -> impl fmt::Display + 'a {
        FeatureDisplay { f: self, syms }
    }
}

struct FeatureDisplay<'a> {
    f: &'a Feature,
    syms: &'a dyn Symbols,
}

impl fmt::Display for FeatureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |s: Sym| self.syms.resolve(s);
        let ctx = |c: &Context| match c {
            Context::Positional(i, l) => format!("({i}, {})", r(*l)),
            Context::Token(t) => r(*t).to_string(),
        };
        match self.f {
            Feature::Token(t) => write!(f, "{}", r(*t)),
            Feature::Parent(t, i, l) => write!(f, "({}, {i}, {})", r(*t), r(*l)),
            Feature::Sibling(a, b) => write!(f, "({}, {})", r(*a), r(*b)),
            Feature::VarUsage(a, b) => write!(f, "({}, {})", ctx(a), ctx(b)),
        }
    }
}

/// Per-leaf features of one tree, `F(n)` for every `n ∈ N(t)` in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreeFeatures {
    features: Vec<Feature>,
    offsets: Vec<u32>,
}

impl TreeFeatures {
    pub fn leaf_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// `F(n)`.
    pub fn leaf(&self, leaf: LeafId) -> &[Feature] {
        let i = leaf as usize;
        &self.features[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Every feature of every leaf, in leaf order.
    pub fn all(&self) -> &[Feature] {
        &self.features
    }

    /// `F(t)`.
    pub fn multiset(&self) -> Multiset<Feature> {
        self.features.iter().copied().collect()
    }

    /// `⊎_{n∈leaves} F(n)`.
    pub fn multiset_of(&self, leaves: impl IntoIterator<Item = LeafId>) -> Multiset<Feature> {
        let mut m = Multiset::new();
        for l in leaves {
            for f in self.leaf(l) {
                m.insert(*f, 1);
            }
        }
        m
    }
}

/// Symbol views of one tree shared by all leaves.
struct Prepared {
    /// Token symbol per leaf, `#VAR` for locals.
    tokens: Vec<Sym>,
    labels: Vec<Sym>,
    member_access: Vec<bool>,
}

fn prepare(t: &AnnotatedTree, syms: &mut dyn Symbols) -> Prepared {
    let tokens = t
        .tree
        .leaves()
        .iter()
        .enumerate()
        .map(|(i, l)| if t.is_local(i as LeafId) { VAR } else { syms.intern(&l.text) })
        .collect();
    let mut labels = Vec::with_capacity(t.tree.nodes().len());
    let mut member_access = Vec::with_capacity(t.tree.nodes().len());
    for id in 0..t.tree.nodes().len() as NodeId {
        let label = t.tree.label(id);
        member_access.push(label == MEMBER_ACCESS_LABEL);
        labels.push(syms.intern(&label));
    }
    Prepared { tokens, labels, member_access }
}

/// `C(n)` for a local variable token.
pub fn context_of(t: &AnnotatedTree, leaf: LeafId, syms: &mut dyn Symbols) -> Context {
    let p = prepare(t, syms);
    context_with(t, &p, leaf)
}

fn context_with(t: &AnnotatedTree, p: &Prepared, leaf: LeafId) -> Context {
    let l = t.tree.leaf(leaf);
    if p.member_access[l.parent as usize] {
        if let Some(&first) = t.tree.leaves_under(l.parent).iter().find(|&&m| !t.is_local(m)) {
            return Context::Token(p.tokens[first as usize]);
        }
    }
    Context::Positional(l.slot, p.labels[l.parent as usize])
}

/// `F(n)` for one token.
pub fn featurize_token(t: &AnnotatedTree, leaf: LeafId, syms: &mut dyn Symbols) -> Vec<Feature> {
    let p = prepare(t, syms);
    let uses = usage_links(t);
    let mut out = Vec::new();
    token_features(t, &p, &uses, leaf, &mut out);
    out
}

/// `F(t)` split per leaf.
pub fn featurize_tree(t: &AnnotatedTree, syms: &mut dyn Symbols) -> TreeFeatures {
    let p = prepare(t, syms);
    let uses = usage_links(t);
    let n = t.tree.leaf_count();
    let mut features = Vec::with_capacity(n * 8);
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for leaf in 0..n as LeafId {
        token_features(t, &p, &uses, leaf, &mut features);
        offsets.push(features.len() as u32);
    }
    TreeFeatures { features, offsets }
}

/// `(PrevUse(n), NextUse(n))` for every leaf.
fn usage_links(t: &AnnotatedTree) -> Vec<(Option<LeafId>, Option<LeafId>)> {
    let n = t.tree.leaf_count();
    let mut links = vec![(None, None); n];
    let mut last: rustc_hash::FxHashMap<u32, LeafId> = Default::default();
    for leaf in 0..n as LeafId {
        if !t.is_local(leaf) {
            continue;
        }
        let Some(b) = t.vars.binding(leaf) else { continue };
        if let Some(prev) = last.insert(b, leaf) {
            links[leaf as usize].0 = Some(prev);
            links[prev as usize].1 = Some(leaf);
        }
    }
    links
}

fn token_features(
    t: &AnnotatedTree,
    p: &Prepared,
    uses: &[(Option<LeafId>, Option<LeafId>)],
    leaf: LeafId,
    out: &mut Vec<Feature>,
) {
    let i = leaf as usize;
    let tok = p.tokens[i];
    out.push(Feature::Token(tok));
    for (slot, node) in t.tree.ancestors(leaf).take(PARENT_DEPTH) {
        out.push(Feature::Parent(tok, slot, p.labels[node as usize]));
    }
    if i > 0 {
        out.push(Feature::Sibling(p.tokens[i - 1], tok));
    }
    if i + 1 < p.tokens.len() {
        out.push(Feature::Sibling(tok, p.tokens[i + 1]));
    }
    if t.is_local(leaf) {
        let (prev, next) = uses[i];
        let here = context_with(t, p, leaf);
        if let Some(prev) = prev {
            out.push(Feature::VarUsage(context_with(t, p, prev), here));
        }
        if let Some(next) = next {
            out.push(Feature::VarUsage(here, context_with(t, p, next)));
        }
    }
}
