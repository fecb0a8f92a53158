//! Local/global variable classification under block scoping.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::tree::{Element, LeafId, NodeId, Role, SimplifiedParseTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarClass {
    Local,
    Global,
    NonVariable,
}

/// Per-leaf variable classes; locals carry a binding id shared by every usage
/// of the same declaration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariableAnnotation {
    pub classes: Vec<VarClass>,
    pub bindings: Vec<Option<u32>>,
}

impl VariableAnnotation {
    pub fn is_local(&self, leaf: LeafId) -> bool {
        self.classes[leaf as usize] == VarClass::Local
    }

    pub fn binding(&self, leaf: LeafId) -> Option<u32> {
        self.bindings[leaf as usize]
    }
}

/// A tree together with its variable annotation; the unit every later stage
/// consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedTree {
    pub tree: SimplifiedParseTree,
    pub vars: VariableAnnotation,
}

impl AnnotatedTree {
    pub fn new(tree: SimplifiedParseTree, params: &[String]) -> Self {
        let vars = classify_variables(&tree, params);
        Self { tree, vars }
    }

    /// A fragment cut from an unseen method: see [`classify_snippet`].
    pub fn snippet(tree: SimplifiedParseTree) -> Self {
        let vars = classify_snippet(&tree);
        Self { tree, vars }
    }

    pub fn is_local(&self, leaf: LeafId) -> bool {
        self.vars.is_local(leaf)
    }
}

/// Classifies every non-keyword token. `params` are names declared by the
/// enclosing method signature; they are visible throughout the tree.
///
/// Declarations bind in the innermost scope-opening ancestor; names resolve
/// innermost-first. Unresolved names are global; identifiers in member or
/// callee position and literals are non-variables.
pub fn classify_variables(tree: &SimplifiedParseTree, params: &[String]) -> VariableAnnotation {
    classify(tree, params, false)
}

/// Like [`classify_variables`] for a fragment whose enclosing declarations are
/// missing: an unresolved name starting with a lowercase letter, other than an
/// `mName` member field, is taken as a local of the enclosing method, one
/// binding per distinct name.
pub fn classify_snippet(tree: &SimplifiedParseTree) -> VariableAnnotation {
    classify(tree, &[], true)
}

/// Lowercase initial, and not the `mField` member convention.
fn looks_local(name: &str) -> bool {
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some('m'), Some(c)) if c.is_ascii_uppercase() => false,
        (Some(c), _) => c.is_ascii_lowercase(),
        _ => false,
    }
}

fn classify(tree: &SimplifiedParseTree, params: &[String], free_locals: bool) -> VariableAnnotation {
    let n = tree.leaf_count();
    let mut out = VariableAnnotation { classes: vec![VarClass::NonVariable; n], bindings: vec![None; n] };
    let mut scopes: Vec<FxHashMap<&str, u32>> = vec![FxHashMap::default()];
    let mut next_binding = 0u32;
    for p in params {
        scopes[0].insert(p.as_str(), next_binding);
        next_binding += 1;
    }
    let mut free = free_locals.then(FxHashMap::default);
    visit(tree, tree.root(), &mut scopes, &mut free, &mut next_binding, &mut out);
    out
}

fn visit<'t>(
    tree: &'t SimplifiedParseTree,
    id: NodeId,
    scopes: &mut Vec<FxHashMap<&'t str, u32>>,
    free: &mut Option<FxHashMap<&'t str, u32>>,
    next_binding: &mut u32,
    out: &mut VariableAnnotation,
) {
    let node = tree.node(id);
    if node.scope {
        scopes.push(FxHashMap::default());
    }
    for e in &node.elements {
        match e {
            Element::Keyword(_) => {}
            Element::Node(child) => visit(tree, *child, scopes, free, next_binding, out),
            Element::Leaf(l) => {
                let leaf = tree.leaf(*l);
                let i = *l as usize;
                match leaf.role {
                    Role::Declaration => {
                        let b = *next_binding;
                        *next_binding += 1;
                        scopes.last_mut().unwrap().insert(leaf.text.as_str(), b);
                        out.classes[i] = VarClass::Local;
                        out.bindings[i] = Some(b);
                    }
                    Role::Name => {
                        let text = leaf.text.as_str();
                        let bound = scopes.iter().rev().find_map(|s| s.get(text)).copied().or_else(|| {
                            let free = free.as_mut()?;
                            if !looks_local(text) {
                                return None;
                            }
                            Some(*free.entry(text).or_insert_with(|| {
                                *next_binding += 1;
                                *next_binding - 1
                            }))
                        });
                        match bound {
                            Some(b) => {
                                out.classes[i] = VarClass::Local;
                                out.bindings[i] = Some(b);
                            }
                            None => out.classes[i] = VarClass::Global,
                        }
                    }
                    Role::Type => out.classes[i] = VarClass::Global,
                    Role::Member | Role::Callee | Role::Literal | Role::Other => {}
                }
            }
        }
    }
    if node.scope {
        scopes.pop();
    }
}
