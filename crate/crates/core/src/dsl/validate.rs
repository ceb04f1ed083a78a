use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SpecKind, TreeDocument};
use crate::tree::{DecoratorKind, NodeId, NodeKind, TreeNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticCode {
    UnknownBehavior,
    KindMismatch,
    LeafWithChildren,
    DecoratorArity,
    EmptyControlNode,
    InvalidThreshold,
    InvalidRetryBudget,
    UndeclaredKey,
    PortTypeMismatch,
    MissingPort,
    UnknownPort,
    DuplicateNodeId,
    /// Sequence/Fallback with memory somewhere below a Parallel.
    MemoryUnderParallel,
    /// Fallback child Action with no Condition before it.
    UnguardedFallbackAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub tree: String,
    pub node_id: NodeId,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{:?}] {}/{}: {}", self.code, self.tree, self.node_id, self.message)
    }
}

/// CLI exit code for a diagnostic set: 0 clean, 1 warnings only, 2 errors.
pub fn exit_code(diagnostics: &[Diagnostic]) -> i32 {
    match diagnostics.iter().map(|d| d.severity).max() {
        None => 0,
        Some(Severity::Warning) => 1,
        Some(Severity::Error) => 2,
    }
}

pub fn validate(doc: &TreeDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (name, root) in &doc.trees {
        let mut v = Validator {
            doc,
            tree: name,
            out: &mut out,
            seen: HashSet::new(),
        };
        v.node(root, false);
    }
    out
}

struct Validator<'a> {
    doc: &'a TreeDocument,
    tree: &'a str,
    out: &'a mut Vec<Diagnostic>,
    seen: HashSet<&'a NodeId>,
}

impl<'a> Validator<'a> {
    fn push(&mut self, severity: Severity, code: DiagnosticCode, node: &TreeNode, message: String) {
        self.out.push(Diagnostic {
            severity,
            code,
            tree: self.tree.to_string(),
            node_id: node.id.clone(),
            message,
        });
    }

    fn error(&mut self, code: DiagnosticCode, node: &TreeNode, message: String) {
        self.push(Severity::Error, code, node, message);
    }

    fn node(&mut self, node: &'a TreeNode, under_parallel: bool) {
        use DiagnosticCode::*;
        if !self.seen.insert(&node.id) {
            self.error(DuplicateNodeId, node, format!("node id `{}` used twice", node.id));
        }
        let n = node.children.len();
        match &node.kind {
            NodeKind::Action { behavior, ports } | NodeKind::Condition { behavior, ports } => {
                let expected = if matches!(node.kind, NodeKind::Action { .. }) {
                    SpecKind::Action
                } else {
                    SpecKind::Condition
                };
                if n > 0 {
                    self.error(LeafWithChildren, node, format!("{:?} cannot have children", expected));
                }
                self.leaf(node, behavior, expected, ports);
            }
            NodeKind::Decorator(kind) => {
                if n != 1 {
                    self.error(DecoratorArity, node, format!("decorator has {n} children, needs exactly 1"));
                }
                if let DecoratorKind::RetryUntilSuccessful { max_attempts: 0 } = kind {
                    self.error(InvalidRetryBudget, node, "max_attempts must be at least 1".into());
                }
            }
            NodeKind::Parallel { success_threshold } => {
                let required = success_threshold.required(n);
                if n == 0 {
                    self.error(EmptyControlNode, node, "Parallel without children".into());
                } else if required == 0 || required > n {
                    self.error(
                        InvalidThreshold,
                        node,
                        format!("success_threshold {required} cannot be met by {n} children"),
                    );
                }
            }
            NodeKind::Sequence { memory } | NodeKind::Fallback { memory } => {
                if n == 0 {
                    self.error(EmptyControlNode, node, format!("{} without children", node.kind.name()));
                }
                if *memory && under_parallel {
                    self.push(
                        Severity::Warning,
                        MemoryUnderParallel,
                        node,
                        format!(
                            "{} with memory under a Parallel skips already-completed children \
                             and stops reacting to changes in their conditions",
                            node.kind.name()
                        ),
                    );
                }
                if let NodeKind::Fallback { .. } = node.kind {
                    self.fallback_guards(node);
                }
            }
        }
        let below_parallel = under_parallel || matches!(node.kind, NodeKind::Parallel { .. });
        for child in &node.children {
            self.node(child, below_parallel);
        }
    }

    fn fallback_guards(&mut self, node: &TreeNode) {
        let mut guarded = false;
        for child in &node.children {
            match child.kind {
                NodeKind::Condition { .. } => guarded = true,
                NodeKind::Action { .. } if !guarded => self.push(
                    Severity::Warning,
                    DiagnosticCode::UnguardedFallbackAction,
                    child,
                    format!(
                        "Action `{}` under Fallback `{}` has no preceding goal Condition",
                        child.id, node.id
                    ),
                ),
                _ => {}
            }
        }
    }

    fn leaf(&mut self, node: &TreeNode, behavior: &str, expected: SpecKind, ports: &crate::tree::Ports) {
        use DiagnosticCode::*;
        let Some(spec) = self.doc.behaviors.get(behavior) else {
            self.error(UnknownBehavior, node, format!("behavior `{behavior}` is not in the manifest"));
            return;
        };
        if spec.kind != expected {
            self.error(
                KindMismatch,
                node,
                format!("`{behavior}` is declared as {:?}, used as {:?}", spec.kind, expected),
            );
        }
        for (port, ty) in &spec.ports {
            if !ports.contains_key(port) {
                self.error(MissingPort, node, format!("required port `{port}` ({ty}) is not bound"));
            }
        }
        for (port, key) in ports {
            let Some(&want) = spec.ports.get(port) else {
                self.error(UnknownPort, node, format!("`{behavior}` has no port `{port}`"));
                continue;
            };
            match self.doc.blackboard.get(key) {
                None => self.error(UndeclaredKey, node, format!("port `{port}` bound to undeclared key `{key}`")),
                Some(&have) if have != want => self.error(
                    PortTypeMismatch,
                    node,
                    format!("port `{port}` expects {want}, key `{key}` is {have}"),
                ),
                Some(_) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, BehaviorSpec};
    use super::*;
    use crate::blackboard::ValueType;
    use crate::tree::SuccessThreshold;
    use std::collections::BTreeMap;

    fn doc_with(tree: TreeNode) -> TreeDocument {
        let mut doc = TreeDocument::default();
        doc.behaviors.insert(
            "A".into(),
            BehaviorSpec { kind: SpecKind::Action, ports: BTreeMap::new() },
        );
        doc.behaviors.insert(
            "C".into(),
            BehaviorSpec { kind: SpecKind::Condition, ports: BTreeMap::new() },
        );
        doc.trees.insert("t".into(), tree);
        doc
    }

    fn codes(d: &[Diagnostic]) -> Vec<DiagnosticCode> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn clean_tree() {
        let doc = doc_with(TreeNode::fallback(
            "f",
            vec![TreeNode::condition("c", "C"), TreeNode::action("a", "A")],
        ));
        let d = validate(&doc);
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(exit_code(&d), 0);
    }

    #[test]
    fn threshold_larger_than_children() {
        let doc = doc_with(TreeNode::parallel(
            "p",
            SuccessThreshold::Count(3),
            vec![TreeNode::action("a", "A"), TreeNode::action("b", "A")],
        ));
        let d = validate(&doc);
        assert_eq!(codes(&d), [DiagnosticCode::InvalidThreshold]);
        assert_eq!(exit_code(&d), 2);
    }

    #[test]
    fn memory_under_parallel_warns() {
        let doc = doc_with(TreeNode::parallel(
            "p",
            SuccessThreshold::All,
            vec![TreeNode::sequence(
                "s",
                vec![TreeNode::memory_sequence("m", vec![TreeNode::action("a", "A")])],
            )],
        ));
        let d = validate(&doc);
        assert_eq!(codes(&d), [DiagnosticCode::MemoryUnderParallel]);
        assert_eq!(d[0].node_id.as_str(), "m");
        assert_eq!(exit_code(&d), 1);
    }

    #[test]
    fn unguarded_fallback_action_warns() {
        let doc = doc_with(TreeNode::fallback(
            "f",
            vec![TreeNode::action("a", "A"), TreeNode::condition("c", "C")],
        ));
        assert_eq!(codes(&validate(&doc)), [DiagnosticCode::UnguardedFallbackAction]);
    }

    #[test]
    fn leaf_errors() {
        let mut doc = doc_with(TreeNode::sequence(
            "s",
            vec![
                TreeNode::action("x", "Nope"),
                TreeNode::action("y", "C"),
                TreeNode::action("z", "P").with_port("hole", "current"),
                TreeNode::action("w", "P").with_port("hole", "missing"),
                TreeNode::action("v", "P"),
                TreeNode::action("u", "P").with_port("hole", "flag").with_port("extra", "flag"),
            ],
        ));
        doc.behaviors.insert(
            "P".into(),
            BehaviorSpec {
                kind: SpecKind::Action,
                ports: [("hole".to_string(), ValueType::Hole)].into(),
            },
        );
        doc.blackboard.insert("current".into(), ValueType::Hole);
        doc.blackboard.insert("flag".into(), ValueType::Flag);
        use DiagnosticCode::*;
        assert_eq!(
            codes(&validate(&doc)),
            [UnknownBehavior, KindMismatch, UndeclaredKey, MissingPort, UnknownPort, PortTypeMismatch]
        );
    }

    #[test]
    fn structural_errors_on_programmatic_trees() {
        let mut bad = TreeNode::condition("c", "C");
        bad.children.push(TreeNode::action("a", "A"));
        let doc = doc_with(TreeNode::sequence(
            "s",
            vec![
                bad,
                TreeNode::new("d", NodeKind::Decorator(DecoratorKind::Inverter), vec![]),
                TreeNode::new("e", NodeKind::Fallback { memory: false }, vec![]),
                TreeNode::decorator(
                    "r",
                    DecoratorKind::RetryUntilSuccessful { max_attempts: 0 },
                    TreeNode::action("s", "A"),
                ),
            ],
        ));
        use DiagnosticCode::*;
        assert_eq!(
            codes(&validate(&doc)),
            [LeafWithChildren, DecoratorArity, EmptyControlNode, InvalidRetryBudget, DuplicateNodeId]
        );
    }

    #[test]
    fn diagnostics_carry_node_ids() {
        let text = r#"<TreeDocument format="1"><Tree name="t"><Action id="a" name="Missing"/></Tree></TreeDocument>"#;
        let d = validate(&parse(text).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].node_id.as_str(), "a");
        assert_eq!(d[0].tree, "t");
    }
}
