//! Simplified parse trees.
//!
//! A tree is an ordered list whose elements are keyword tokens, non-keyword
//! tokens (leaves) or nested trees. Nodes and leaves live in arenas owned by
//! [`SimplifiedParseTree`]; leaf ids follow source order, so iterating the leaf
//! arena yields `N(t)` for the root.

use std::fmt;

use super::lexer::Span;

pub type NodeId = u32;
pub type LeafId = u32;

/// Syntactic position of a non-keyword token, recorded by the parser and used
/// for variable classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Declares a variable (local declarator, parameter, catch or loop variable).
    Declaration,
    /// Simple name in expression position.
    Name,
    /// Identifier right of `.`.
    Member,
    /// Identifier immediately left of `(`.
    Callee,
    /// Part of a type.
    Type,
    Literal,
    /// Anything else (labels, imported tokens without role information).
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Keyword(String),
    Leaf(LeafId),
    Node(NodeId),
}

impl Element {
    pub fn is_keyword(&self) -> bool {
        matches!(self, Element::Keyword(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub elements: Vec<Element>,
    pub parent: Option<NodeId>,
    /// 1-based position among the parent's non-keyword elements; 0 for the root.
    pub slot: u32,
    /// Opens a lexical scope (block, for, catch clause, method).
    pub scope: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub text: String,
    pub parent: NodeId,
    /// 1-based position among the parent's non-keyword elements.
    pub slot: u32,
    pub role: Role,
    pub span: Option<Span>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplifiedParseTree {
    nodes: Vec<Node>,
    leaves: Vec<Leaf>,
    root: NodeId,
}

impl SimplifiedParseTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn leaf(&self, id: LeafId) -> &Leaf {
        &self.leaves[id as usize]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// All non-keyword tokens in source order.
    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// `L(t)`: keyword texts concatenated, `#` for leaves and subtrees.
    pub fn label(&self, id: NodeId) -> String {
        let mut out = String::new();
        for e in &self.node(id).elements {
            match e {
                Element::Keyword(k) => out.push_str(k),
                _ => out.push('#'),
            }
        }
        out
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.nodes.len() as NodeId).map(|id| self.label(id)).collect()
    }

    /// Token texts of the whole tree, in order.
    pub fn token_texts(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(self.root, &mut |e| match e {
            Element::Keyword(k) => out.push(k.as_str()),
            Element::Leaf(l) => out.push(self.leaf(*l).text.as_str()),
            Element::Node(_) => {}
        });
        out
    }

    /// In-order visit of every keyword and leaf element below `id`.
    pub fn walk<'a>(&'a self, id: NodeId, f: &mut dyn FnMut(&'a Element)) {
        for e in &self.node(id).elements {
            match e {
                Element::Node(child) => self.walk(*child, f),
                other => f(other),
            }
        }
    }

    /// Leaves below `id`, in source order (`N(t)`).
    pub fn leaves_under(&self, id: NodeId) -> Vec<LeafId> {
        let mut out = Vec::new();
        self.walk(id, &mut |e| {
            if let Element::Leaf(l) = e {
                out.push(*l);
            }
        });
        out
    }

    /// Ancestors of a leaf, innermost first, each with the 1-based slot of the
    /// child on the path.
    pub fn ancestors(&self, leaf: LeafId) -> impl Iterator<Item = (u32, NodeId)> + '_ {
        let first = self.leaf(leaf);
        let mut next = Some((first.slot, first.parent));
        std::iter::from_fn(move || {
            let (slot, id) = next?;
            let node = self.node(id);
            next = node.parent.map(|p| (node.slot, p));
            Some((slot, id))
        })
    }

    /// Checks structural invariants; used on imported trees and in tests.
    pub fn validate(&self) -> Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.elements.is_empty() {
                return Err(format!("node {i} has no elements"));
            }
            if node.elements.len() == 1 && matches!(node.elements[0], Element::Node(_)) {
                return Err(format!("node {i} is a list containing a single tree"));
            }
        }
        let order = self.leaves_under(self.root);
        if order.iter().enumerate().any(|(i, &l)| l as usize != i) || order.len() != self.leaves.len() {
            return Err("leaf arena is not in source order".into());
        }
        Ok(())
    }
}

impl fmt::Display for SimplifiedParseTree {
    /// Bracketed list notation, e.g. `["x", ">", ["y", ".", "f"]]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &SimplifiedParseTree, id: NodeId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("[")?;
            for (i, e) in t.node(id).elements.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match e {
                    Element::Keyword(k) => write!(f, "{k:?}")?,
                    Element::Leaf(l) => write!(f, "{:?}", t.leaf(*l).text)?,
                    Element::Node(n) => go(t, *n, f)?,
                }
            }
            f.write_str("]")
        }
        go(self, self.root, f)
    }
}

/// Incremental tree construction. Leaves must be added in source order.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
    leaves: Vec<Leaf>,
}

/// A checkpoint for speculative parsing.
#[derive(Debug, Clone, Copy)]
pub struct Mark {
    nodes: usize,
    leaves: usize,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, text: impl Into<String>, role: Role, span: Option<Span>, line: u32) -> Element {
        let id = self.leaves.len() as LeafId;
        self.leaves.push(Leaf { text: text.into(), parent: 0, slot: 0, role, span, line });
        Element::Leaf(id)
    }

    pub fn set_role(&mut self, e: &Element, role: Role) {
        if let Element::Leaf(l) = e {
            self.leaves[*l as usize].role = role;
        }
    }

    pub fn role(&self, e: &Element) -> Option<Role> {
        match e {
            Element::Leaf(l) => Some(self.leaves[*l as usize].role),
            _ => None,
        }
    }

    /// Collects `elements` into a node. A single element is returned as is, so
    /// no node is ever a list holding one subtree.
    pub fn node(&mut self, mut elements: Vec<Element>) -> Element {
        assert!(!elements.is_empty(), "empty node");
        if elements.len() == 1 {
            return elements.pop().unwrap();
        }
        Element::Node(self.push_node(elements, false))
    }

    /// Like [`node`](Self::node) but the resulting node opens a scope. A lone
    /// element is still wrapped so the scope has somewhere to live, unless it
    /// already is a node.
    pub fn scope_node(&mut self, mut elements: Vec<Element>) -> Element {
        if elements.len() == 1 {
            if let Element::Node(id) = elements[0] {
                self.nodes[id as usize].scope = true;
                return elements.pop().unwrap();
            }
        }
        Element::Node(self.push_node(elements, true))
    }

    /// Collects `elements` into a node without collapsing a lone element.
    pub fn list(&mut self, elements: Vec<Element>) -> Element {
        assert!(!elements.is_empty(), "empty node");
        Element::Node(self.push_node(elements, false))
    }

    fn push_node(&mut self, elements: Vec<Element>, scope: bool) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node { elements, parent: None, slot: 0, scope });
        id
    }

    pub fn mark(&self) -> Mark {
        Mark { nodes: self.nodes.len(), leaves: self.leaves.len() }
    }

    pub fn reset(&mut self, mark: Mark) {
        self.nodes.truncate(mark.nodes);
        self.leaves.truncate(mark.leaves);
    }

    /// Finishes the tree rooted at `root`, wrapping a bare token into a list.
    pub fn finish(mut self, root: Element) -> SimplifiedParseTree {
        let root = match root {
            Element::Node(id) => id,
            other => self.push_node(vec![other], false),
        };
        let mut tree = SimplifiedParseTree { nodes: self.nodes, leaves: self.leaves, root };
        link(&mut tree);
        tree
    }
}

/// Builds a tree from an explicit nested description; used by the interchange
/// importer and by tests.
pub fn from_nested(root: Nested) -> SimplifiedParseTree {
    fn go(b: &mut TreeBuilder, n: Nested) -> Element {
        match n {
            Nested::Keyword(k) => Element::Keyword(k),
            Nested::Token(t, role) => b.leaf(t, role, None, 0),
            Nested::List(items) => {
                let elements: Vec<Element> = items.into_iter().map(|i| go(b, i)).collect();
                Element::Node(b.push_node(elements, false))
            }
        }
    }
    let mut b = TreeBuilder::new();
    let root = go(&mut b, root);
    b.finish(root)
}

/// Owned nested form of a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nested {
    Keyword(String),
    Token(String, Role),
    List(Vec<Nested>),
}

impl Nested {
    pub fn kw(s: &str) -> Self {
        Nested::Keyword(s.to_string())
    }

    pub fn tok(s: &str) -> Self {
        Nested::Token(s.to_string(), Role::Other)
    }
}

fn link(tree: &mut SimplifiedParseTree) {
    let mut stack = vec![tree.root];
    while let Some(id) = stack.pop() {
        let mut slot = 0;
        let elements = tree.nodes[id as usize].elements.clone();
        for e in elements {
            match e {
                Element::Keyword(_) => {}
                Element::Leaf(l) => {
                    slot += 1;
                    let leaf = &mut tree.leaves[l as usize];
                    leaf.parent = id;
                    leaf.slot = slot;
                }
                Element::Node(n) => {
                    slot += 1;
                    let node = &mut tree.nodes[n as usize];
                    node.parent = Some(id);
                    node.slot = slot;
                    stack.push(n);
                }
            }
        }
    }
}
