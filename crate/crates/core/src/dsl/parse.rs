use std::collections::{BTreeMap, HashSet};

use roxmltree::{Document, Node};

use super::{BehaviorSpec, DslError, SpecKind, TreeDocument, FORMAT_VERSION};
use crate::blackboard::ValueType;
use crate::tree::{DecoratorKind, NodeKind, Ports, SuccessThreshold, TreeNode};

/// Parse a tree-definition document.
pub fn parse(text: &str) -> Result<TreeDocument, DslError> {
    let xml = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        DslError::SyntaxError {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    Parser { xml: &xml }.document()
}

struct Parser<'d, 'i> {
    xml: &'d Document<'i>,
}

impl<'d, 'i> Parser<'d, 'i> {
    fn error_at(&self, pos: usize, message: impl Into<String>) -> DslError {
        let p = self.xml.text_pos_at(pos);
        DslError::SyntaxError {
            line: p.row,
            column: p.col,
            message: message.into(),
        }
    }

    fn error(&self, node: Node, message: impl Into<String>) -> DslError {
        self.error_at(node.range().start, message)
    }

    /// Element children, rejecting stray text.
    fn elements(&self, node: Node<'d, 'i>) -> Result<Vec<Node<'d, 'i>>, DslError> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_element() {
                out.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
                return Err(self.error(child, "unexpected text content"));
            }
        }
        Ok(out)
    }

    fn check_attrs(&self, node: Node, allowed: &[&str]) -> Result<(), DslError> {
        for attr in node.attributes() {
            if attr.namespace().is_some() || !allowed.contains(&attr.name()) {
                return Err(self.error_at(
                    attr.range().start,
                    format!(
                        "unknown attribute `{}` on <{}>",
                        attr.name(),
                        node.tag_name().name()
                    ),
                ));
            }
        }
        Ok(())
    }

    fn required<'a>(&self, node: Node<'a, 'i>, attr: &str) -> Result<&'a str, DslError> {
        node.attribute(attr).ok_or_else(|| {
            self.error(
                node,
                format!("<{}> is missing attribute `{attr}`", node.tag_name().name()),
            )
        })
    }

    fn attr_error(&self, node: Node, attr: &str, message: String) -> DslError {
        let pos = node
            .attributes()
            .find(|a| a.name() == attr)
            .map(|a| a.range().start)
            .unwrap_or(node.range().start);
        self.error_at(pos, message)
    }

    fn document(&self) -> Result<TreeDocument, DslError> {
        let root = self.xml.root_element();
        if root.tag_name().name() != "TreeDocument" {
            return Err(self.error(
                root,
                format!("expected <TreeDocument>, found <{}>", root.tag_name().name()),
            ));
        }
        self.check_attrs(root, &["format"])?;
        let format = self.required(root, "format")?;
        if format != FORMAT_VERSION.to_string() {
            return Err(DslError::UnsupportedVersion {
                found: format.to_string(),
            });
        }
        let mut doc = TreeDocument::default();
        for section in self.elements(root)? {
            match section.tag_name().name() {
                "Blackboard" => self.blackboard(section, &mut doc.blackboard)?,
                "Behaviors" => self.behaviors(section, &mut doc.behaviors)?,
                "Tree" => {
                    self.check_attrs(section, &["name"])?;
                    let name = self.required(section, "name")?;
                    if doc.trees.contains_key(name) {
                        let p = self.xml.text_pos_at(section.range().start);
                        return Err(DslError::DuplicateTreeName {
                            name: name.to_string(),
                            line: p.row,
                            column: p.col,
                        });
                    }
                    let elems = self.elements(section)?;
                    let [top] = elems.as_slice() else {
                        return Err(self.error(section, "<Tree> must contain exactly one root node"));
                    };
                    let mut ids = HashSet::new();
                    let tree = self.node(name, *top, &mut ids)?;
                    doc.trees.insert(name.to_string(), tree);
                }
                other => return Err(self.error(section, format!("unknown element <{other}>"))),
            }
        }
        Ok(doc)
    }

    fn blackboard(&self, section: Node, keys: &mut BTreeMap<String, ValueType>) -> Result<(), DslError> {
        self.check_attrs(section, &[])?;
        for key in self.elements(section)? {
            if key.tag_name().name() != "Key" {
                return Err(self.error(key, format!("unknown element <{}>", key.tag_name().name())));
            }
            self.check_attrs(key, &["name", "type"])?;
            let name = self.required(key, "name")?;
            let ty = self.required(key, "type")?;
            let ty = ValueType::parse(ty)
                .ok_or_else(|| self.attr_error(key, "type", format!("unknown value type `{ty}`")))?;
            if keys.insert(name.to_string(), ty).is_some() {
                return Err(self.error(key, format!("blackboard key `{name}` declared twice")));
            }
        }
        Ok(())
    }

    fn behaviors(&self, section: Node, specs: &mut BTreeMap<String, BehaviorSpec>) -> Result<(), DslError> {
        self.check_attrs(section, &[])?;
        for b in self.elements(section)? {
            let kind = match b.tag_name().name() {
                "Action" => SpecKind::Action,
                "Condition" => SpecKind::Condition,
                other => return Err(self.error(b, format!("unknown element <{other}>"))),
            };
            self.check_attrs(b, &["name", "ports"])?;
            let name = self.required(b, "name")?;
            let mut ports = BTreeMap::new();
            for (port, ty) in pairs(b.attribute("ports").unwrap_or(""), ':')
                .map_err(|m| self.attr_error(b, "ports", m))?
            {
                let ty = ValueType::parse(&ty)
                    .ok_or_else(|| self.attr_error(b, "ports", format!("unknown value type `{ty}`")))?;
                ports.insert(port, ty);
            }
            if specs.insert(name.to_string(), BehaviorSpec { kind, ports }).is_some() {
                return Err(self.error(b, format!("behavior `{name}` declared twice")));
            }
        }
        Ok(())
    }

    fn node(&self, tree: &str, el: Node<'d, 'i>, ids: &mut HashSet<String>) -> Result<TreeNode, DslError> {
        let tag = el.tag_name().name();
        let allowed: &[&str] = match tag {
            "Sequence" | "Fallback" => &["id", "label", "memory"],
            "Parallel" => &["id", "label", "success_threshold"],
            "Decorator" => &["id", "label", "type", "max_attempts"],
            "Action" | "Condition" => &["id", "label", "name", "ports"],
            other => return Err(self.error(el, format!("unknown node kind <{other}>"))),
        };
        self.check_attrs(el, allowed)?;
        let id = self.required(el, "id")?;
        if !ids.insert(id.to_string()) {
            let p = self.xml.text_pos_at(el.range().start);
            return Err(DslError::DuplicateNodeId {
                tree: tree.to_string(),
                node_id: id.into(),
                line: p.row,
                column: p.col,
            });
        }

        let kind = match tag {
            "Sequence" => NodeKind::Sequence { memory: self.flag(el, "memory")? },
            "Fallback" => NodeKind::Fallback { memory: self.flag(el, "memory")? },
            "Parallel" => {
                let raw = el.attribute("success_threshold").unwrap_or("all");
                let success_threshold = if raw == "all" {
                    SuccessThreshold::All
                } else {
                    raw.parse().map(SuccessThreshold::Count).map_err(|_| {
                        self.attr_error(el, "success_threshold", format!("invalid success_threshold `{raw}`"))
                    })?
                };
                NodeKind::Parallel { success_threshold }
            }
            "Decorator" => {
                let ty = self.required(el, "type")?;
                let max = el.attribute("max_attempts");
                let kind = match ty {
                    "Inverter" => DecoratorKind::Inverter,
                    "LoopBody" => DecoratorKind::LoopBody,
                    "RetryUntilSuccessful" => {
                        let raw = max.ok_or_else(|| {
                            self.error(el, "RetryUntilSuccessful requires `max_attempts`")
                        })?;
                        let max_attempts = raw.parse().map_err(|_| {
                            self.attr_error(el, "max_attempts", format!("invalid max_attempts `{raw}`"))
                        })?;
                        DecoratorKind::RetryUntilSuccessful { max_attempts }
                    }
                    other => {
                        return Err(self.attr_error(el, "type", format!("unknown decorator type `{other}`")))
                    }
                };
                if max.is_some() && !matches!(kind, DecoratorKind::RetryUntilSuccessful { .. }) {
                    return Err(self.attr_error(el, "max_attempts", format!("`max_attempts` is not valid on {ty}")));
                }
                NodeKind::Decorator(kind)
            }
            _ => {
                let behavior = self.required(el, "name")?.to_string();
                let ports: Ports = pairs(el.attribute("ports").unwrap_or(""), '=')
                    .map_err(|m| self.attr_error(el, "ports", m))?
                    .into_iter()
                    .collect();
                if tag == "Action" {
                    NodeKind::Action { behavior, ports }
                } else {
                    NodeKind::Condition { behavior, ports }
                }
            }
        };

        let children = self
            .elements(el)?
            .into_iter()
            .map(|c| self.node(tree, c, ids))
            .collect::<Result<Vec<_>, _>>()?;
        if kind.is_leaf() && !children.is_empty() {
            return Err(self.error(el, format!("<{tag}> cannot have children")));
        }
        let mut node = TreeNode::new(id, kind, children);
        if let Some(label) = el.attribute("label") {
            node.label = label.to_string();
        }
        Ok(node)
    }

    fn flag(&self, el: Node, attr: &str) -> Result<bool, DslError> {
        match el.attribute(attr) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(other) => Err(self.attr_error(el, attr, format!("`{attr}` must be true or false, got `{other}`"))),
        }
    }
}

/// Split `a<sep>b, c<sep>d` into pairs.
fn pairs(raw: &str, sep: char) -> Result<Vec<(String, String)>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once(sep)
                .ok_or_else(|| format!("expected `name{sep}value`, got `{item}`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(format!("expected `name{sep}value`, got `{item}`"));
            }
            Ok((k.to_string(), v.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<TreeDocument format="1">
  <Behaviors><Condition name="Ok"/></Behaviors>
  <Tree name="main"><Condition id="root" name="Ok"/></Tree>
</TreeDocument>"#;

    #[test]
    fn minimal_document() {
        let doc = parse(MINIMAL).unwrap();
        assert_eq!(doc.trees.len(), 1);
        let root = doc.tree("main").unwrap();
        assert!(matches!(root.kind, NodeKind::Condition { .. }));
        assert_eq!(root.label, "root");
    }

    #[test]
    fn unclosed_element_reports_line() {
        let text = "<TreeDocument format=\"1\">\n  <Tree name=\"t\">\n    <Sequence id=\"s\">\n      <Action id=\"a\" name=\"A\"/>\n  </Tree>\n</TreeDocument>";
        match parse(text) {
            Err(DslError::SyntaxError { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_attribute_is_an_error() {
        let text = "<TreeDocument format=\"1\">\n<Tree name=\"t\">\n<Action id=\"a\" name=\"A\" retires=\"3\"/>\n</Tree>\n</TreeDocument>";
        match parse(text) {
            Err(DslError::SyntaxError { line, column, message }) => {
                assert_eq!((line, column), (3, 25));
                assert!(message.contains("retires"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_tree_and_node_ids() {
        let dup_tree = r#"<TreeDocument format="1"><Tree name="t"><Action id="a" name="A"/></Tree><Tree name="t"><Action id="a" name="A"/></Tree></TreeDocument>"#;
        assert!(matches!(parse(dup_tree), Err(DslError::DuplicateTreeName { .. })));
        let dup_node = r#"<TreeDocument format="1"><Tree name="t"><Sequence id="a"><Action id="a" name="A"/></Sequence></Tree></TreeDocument>"#;
        assert!(matches!(parse(dup_node), Err(DslError::DuplicateNodeId { .. })));
    }

    #[test]
    fn version_is_checked() {
        let text = r#"<TreeDocument format="2"></TreeDocument>"#;
        assert_eq!(
            parse(text),
            Err(DslError::UnsupportedVersion { found: "2".into() })
        );
    }

    #[test]
    fn ports_and_threshold() {
        let text = r#"<TreeDocument format="1">
<Blackboard><Key name="current_hole" type="hole"/></Blackboard>
<Behaviors><Action name="PopHole" ports="hole:hole"/></Behaviors>
<Tree name="t"><Parallel id="p" success_threshold="1">
  <Action id="pop" name="PopHole" ports="hole=current_hole"/>
</Parallel></Tree></TreeDocument>"#;
        let doc = parse(text).unwrap();
        assert_eq!(doc.blackboard["current_hole"], ValueType::Hole);
        assert_eq!(doc.behaviors["PopHole"].ports["hole"], ValueType::Hole);
        let p = doc.tree("t").unwrap();
        assert_eq!(
            p.kind,
            NodeKind::Parallel { success_threshold: SuccessThreshold::Count(1) }
        );
        match &p.children[0].kind {
            NodeKind::Action { ports, .. } => assert_eq!(ports["hole"], "current_hole"),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn leaf_with_children_rejected() {
        let text = r#"<TreeDocument format="1"><Tree name="t"><Condition id="c" name="C"><Action id="a" name="A"/></Condition></Tree></TreeDocument>"#;
        assert!(matches!(parse(text), Err(DslError::SyntaxError { .. })));
    }
}
