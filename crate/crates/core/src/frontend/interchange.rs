//! JSON interchange format for annotated trees.
//!
//! One document holds one tree. Nodes are objects with fields in this order:
//!
//! ```text
//! {"kind":"tree","children":[...]}
//! {"kind":"keyword","text":"if"}
//! {"kind":"token","text":"x","var":"local","binding":0}
//! {"kind":"token","text":"foo","var":null,"binding":null}
//! ```
//!
//! `var` is `"local"`, `"global"` or `null` (not a variable); `binding` is an
//! integer exactly when `var` is `"local"`. [`export_tree`] emits this
//! canonical compact encoding, so exporting an imported canonical document
//! reproduces it byte for byte.

use serde_json::{Map, Value};

use super::scope::{AnnotatedTree, VarClass, VariableAnnotation};
use super::tree::{Element, NodeId, Role, TreeBuilder};
use super::FrontendError;

fn schema(field: &str, message: impl Into<String>) -> FrontendError {
    FrontendError::Schema { field: field.to_string(), message: message.into() }
}

pub fn export_tree(tree: &AnnotatedTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.tree.root(), &mut out);
    out
}

fn write_str(s: &str, out: &mut String) {
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

fn write_node(t: &AnnotatedTree, id: NodeId, out: &mut String) {
    out.push_str(r#"{"kind":"tree","children":["#);
    for (i, e) in t.tree.node(id).elements.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match e {
            Element::Keyword(k) => {
                out.push_str(r#"{"kind":"keyword","text":"#);
                write_str(k, out);
                out.push('}');
            }
            Element::Leaf(l) => {
                out.push_str(r#"{"kind":"token","text":"#);
                write_str(&t.tree.leaf(*l).text, out);
                out.push_str(r#","var":"#);
                out.push_str(match t.vars.classes[*l as usize] {
                    VarClass::Local => r#""local""#,
                    VarClass::Global => r#""global""#,
                    VarClass::NonVariable => "null",
                });
                out.push_str(r#","binding":"#);
                match t.vars.bindings[*l as usize] {
                    Some(b) => out.push_str(&b.to_string()),
                    None => out.push_str("null"),
                }
                out.push('}');
            }
            Element::Node(n) => write_node(t, *n, out),
        }
    }
    out.push_str("]}");
}

pub fn import_tree(document: &str) -> Result<AnnotatedTree, FrontendError> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    let mut b = TreeBuilder::new();
    let mut vars = VariableAnnotation::default();
    let root = match &value {
        Value::Object(obj) if obj.get("kind") == Some(&Value::String("tree".into())) => {
            read_node(&value, "$", &mut b, &mut vars)?
        }
        Value::Object(_) => return Err(schema("$.kind", "document root must be a tree")),
        _ => return Err(schema("$", "document root must be an object")),
    };
    let tree = b.finish(root);
    tree.validate().map_err(|m| schema("$", m))?;
    Ok(AnnotatedTree { tree, vars })
}

fn check_fields(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), FrontendError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn text_field(obj: &Map<String, Value>, path: &str) -> Result<String, FrontendError> {
    match obj.get("text") {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(schema(&format!("{path}.text"), "must not be empty")),
        Some(_) => Err(schema(&format!("{path}.text"), "must be a string")),
        None => Err(schema(&format!("{path}.text"), "missing")),
    }
}

fn read_node(
    value: &Value,
    path: &str,
    b: &mut TreeBuilder,
    vars: &mut VariableAnnotation,
) -> Result<Element, FrontendError> {
    let Value::Object(obj) = value else {
        return Err(schema(path, "node must be an object"));
    };
    let kind = match obj.get("kind") {
        Some(Value::String(k)) => k.as_str(),
        Some(_) => return Err(schema(&format!("{path}.kind"), "must be a string")),
        None => return Err(schema(&format!("{path}.kind"), "missing")),
    };
    match kind {
        "keyword" => {
            check_fields(obj, path, &["kind", "text"])?;
            Ok(Element::Keyword(text_field(obj, path)?))
        }
        "token" => {
            check_fields(obj, path, &["kind", "text", "var", "binding"])?;
            let text = text_field(obj, path)?;
            let class = match obj.get("var") {
                Some(Value::String(v)) if v == "local" => VarClass::Local,
                Some(Value::String(v)) if v == "global" => VarClass::Global,
                Some(Value::Null) => VarClass::NonVariable,
                Some(_) => {
                    return Err(schema(&format!("{path}.var"), "must be \"local\", \"global\" or null"))
                }
                None => return Err(schema(&format!("{path}.var"), "missing")),
            };
            let binding = match obj.get("binding") {
                Some(Value::Null) => None,
                Some(Value::Number(n)) => Some(
                    n.as_u64()
                        .and_then(|n| u32::try_from(n).ok())
                        .ok_or_else(|| schema(&format!("{path}.binding"), "must be a non-negative 32-bit integer"))?,
                ),
                Some(_) => return Err(schema(&format!("{path}.binding"), "must be an integer or null")),
                None => return Err(schema(&format!("{path}.binding"), "missing")),
            };
            if (class == VarClass::Local) != binding.is_some() {
                return Err(schema(&format!("{path}.binding"), "required exactly for local variables"));
            }
            let role = if class == VarClass::NonVariable { Role::Other } else { Role::Name };
            vars.classes.push(class);
            vars.bindings.push(binding);
            Ok(b.leaf(text, role, None, 0))
        }
        "tree" => {
            check_fields(obj, path, &["kind", "children"])?;
            let children = match obj.get("children") {
                Some(Value::Array(c)) => c,
                Some(_) => return Err(schema(&format!("{path}.children"), "must be an array")),
                None => return Err(schema(&format!("{path}.children"), "missing")),
            };
            if children.is_empty() {
                return Err(schema(&format!("{path}.children"), "must not be empty"));
            }
            let mut els = Vec::with_capacity(children.len());
            for (i, c) in children.iter().enumerate() {
                els.push(read_node(c, &format!("{path}.children[{i}]"), b, vars)?);
            }
            if els.len() == 1 && matches!(els[0], Element::Node(_)) {
                return Err(schema(
                    &format!("{path}.children"),
                    "a tree cannot be a list containing a single tree",
                ));
            }
            Ok(b.list(els))
        }
        other => Err(schema(&format!("{path}.kind"), format!("unknown kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_query;

    #[test]
    fn round_trip_simple_tree() {
        let t = parse_query("X > Y.f").unwrap();
        let doc = export_tree(&t);
        assert_eq!(
            doc,
            r#"{"kind":"tree","children":[{"kind":"token","text":"X","var":"global","binding":null},{"kind":"keyword","text":">"},{"kind":"tree","children":[{"kind":"token","text":"Y","var":"global","binding":null},{"kind":"keyword","text":"."},{"kind":"token","text":"f","var":null,"binding":null}]}]}"#
        );
        let back = import_tree(&doc).unwrap();
        assert_eq!(back.tree.to_string(), t.tree.to_string());
        assert_eq!(back.vars, t.vars);
        assert_eq!(export_tree(&back), doc);
    }

    #[test]
    fn locals_keep_bindings() {
        let t = parse_query("int i = 0; i++; String s = \"q\\\"\";").unwrap();
        let back = import_tree(&export_tree(&t)).unwrap();
        assert_eq!(back.vars, t.vars);
        assert_eq!(back.tree.token_texts(), t.tree.token_texts());
    }

    #[test]
    fn singleton_subtree_rejected() {
        let doc = r#"{"kind":"tree","children":[{"kind":"tree","children":[{"kind":"keyword","text":"{"},{"kind":"keyword","text":"}"}]}]}"#;
        match import_tree(doc) {
            Err(FrontendError::Schema { field, .. }) => assert_eq!(field, "$.children"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let doc = r#"{"kind":"tree","children":[{"kind":"operator","text":"+"}]}"#;
        match import_tree(doc) {
            Err(FrontendError::Schema { field, .. }) => assert_eq!(field, "$.children[0].kind"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_errors_are_named() {
        let cases = [
            (r#"[1]"#, "$"),
            (r#"{"kind":"tree","children":[]}"#, "$.children"),
            (r#"{"kind":"tree","children":[{"kind":"token","text":"x","var":"local","binding":null}]}"#, "$.children[0].binding"),
            (r#"{"kind":"tree","children":[{"kind":"token","text":"x","var":"weird","binding":null}]}"#, "$.children[0].var"),
            (r#"{"kind":"tree","children":[{"kind":"keyword","text":"x","extra":1}]}"#, "$.children[0].extra"),
            (r#"{"kind":"tree","children":[{"kind":"keyword"}]}"#, "$.children[0].text"),
            (r#"{"kind":"keyword","text":"x"}"#, "$.kind"),
        ];
        for (doc, expected) in cases {
            match import_tree(doc) {
                Err(FrontendError::Schema { field, .. }) => assert_eq!(field, expected, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }
}
