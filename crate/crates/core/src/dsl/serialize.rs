use std::fmt::Write;

use super::{SpecKind, TreeDocument};
use crate::tree::{DecoratorKind, NodeKind, Ports, SuccessThreshold, TreeNode};

/// Render a document in canonical form. Output is deterministic.
pub fn serialize(doc: &TreeDocument) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<TreeDocument format=\"{}\">", doc.format);
    if !doc.blackboard.is_empty() {
        out.push_str("  <Blackboard>\n");
        for (key, ty) in &doc.blackboard {
            let _ = writeln!(out, "    <Key name=\"{}\" type=\"{}\"/>", esc(key), ty);
        }
        out.push_str("  </Blackboard>\n");
    }
    if !doc.behaviors.is_empty() {
        out.push_str("  <Behaviors>\n");
        for (name, spec) in &doc.behaviors {
            let tag = match spec.kind {
                SpecKind::Action => "Action",
                SpecKind::Condition => "Condition",
            };
            let _ = write!(out, "    <{tag} name=\"{}\"", esc(name));
            if !spec.ports.is_empty() {
                let ports: Vec<String> = spec.ports.iter().map(|(p, t)| format!("{p}:{t}")).collect();
                let _ = write!(out, " ports=\"{}\"", esc(&ports.join(",")));
            }
            out.push_str("/>\n");
        }
        out.push_str("  </Behaviors>\n");
    }
    for (name, tree) in &doc.trees {
        let _ = writeln!(out, "  <Tree name=\"{}\">", esc(name));
        node(&mut out, tree, 2);
        out.push_str("  </Tree>\n");
    }
    out.push_str("</TreeDocument>\n");
    out
}

fn node(out: &mut String, n: &TreeNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let (tag, extra) = match &n.kind {
        NodeKind::Sequence { memory } => ("Sequence", memory_attr(*memory)),
        NodeKind::Fallback { memory } => ("Fallback", memory_attr(*memory)),
        NodeKind::Parallel { success_threshold } => {
            let t = match success_threshold {
                SuccessThreshold::All => "all".to_string(),
                SuccessThreshold::Count(c) => c.to_string(),
            };
            ("Parallel", format!(" success_threshold=\"{t}\""))
        }
        NodeKind::Decorator(d) => (
            "Decorator",
            match d {
                DecoratorKind::Inverter => " type=\"Inverter\"".to_string(),
                DecoratorKind::LoopBody => " type=\"LoopBody\"".to_string(),
                DecoratorKind::RetryUntilSuccessful { max_attempts } => {
                    format!(" type=\"RetryUntilSuccessful\" max_attempts=\"{max_attempts}\"")
                }
            },
        ),
        NodeKind::Action { behavior, ports } => ("Action", leaf_attrs(behavior, ports)),
        NodeKind::Condition { behavior, ports } => ("Condition", leaf_attrs(behavior, ports)),
    };
    let _ = write!(out, "{pad}<{tag} id=\"{}\"", esc(n.id.as_str()));
    if n.label != n.id.as_str() {
        let _ = write!(out, " label=\"{}\"", esc(&n.label));
    }
    out.push_str(&extra);
    if n.children.is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for child in &n.children {
        node(out, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}</{tag}>");
}

fn memory_attr(memory: bool) -> String {
    if memory {
        " memory=\"true\"".to_string()
    } else {
        String::new()
    }
}

fn leaf_attrs(behavior: &str, ports: &Ports) -> String {
    let mut s = format!(" name=\"{}\"", esc(behavior));
    if !ports.is_empty() {
        let joined: Vec<String> = ports.iter().map(|(p, k)| format!("{p}={k}")).collect();
        let _ = write!(s, " ports=\"{}\"", esc(&joined.join(",")));
    }
    s
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
