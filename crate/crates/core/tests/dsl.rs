use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rockcharge_core::dsl::{self, BehaviorSpec, DslError, SpecKind, TreeDocument};
use rockcharge_core::{TreeNode, ValueType};
use rockcharge_oracle::{random_tree, GenConfig};

fn doc_from(trees: Vec<(String, TreeNode)>) -> TreeDocument {
    let mut doc = TreeDocument::default();
    doc.behaviors.insert("A".into(), BehaviorSpec { kind: SpecKind::Action, ports: Default::default() });
    doc.behaviors.insert("C".into(), BehaviorSpec { kind: SpecKind::Condition, ports: Default::default() });
    doc.blackboard.insert("current_hole".into(), ValueType::Hole);
    doc.blackboard.insert("detonators".into(), ValueType::Int);
    doc.trees.extend(trees);
    doc
}

/// Relabel nodes and bind ports so the generated trees use every attribute.
fn decorate(tree: &mut TreeNode, labels: &[String], salt: usize) {
    fn walk(n: &mut TreeNode, labels: &[String], i: &mut usize) {
        if !labels.is_empty() && i.is_multiple_of(3) {
            n.label = labels[*i % labels.len()].clone();
        }
        if let rockcharge_core::NodeKind::Action { ports, .. } = &mut n.kind {
            if i.is_multiple_of(2) {
                ports.insert("hole".into(), "current_hole".into());
            }
        }
        *i += 1;
        for c in &mut n.children {
            walk(c, labels, i);
        }
    }
    let mut i = salt;
    walk(tree, labels, &mut i);
}

/// 1-based line of the first end tag that does not match the innermost open
/// element, for canonical one-tag-per-line documents.
fn first_mismatched_closer(lines: &[&str]) -> Option<u32> {
    let mut stack: Vec<&str> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix("</") {
            let name = name.trim_end_matches('>');
            if stack.pop() != Some(name) {
                return Some(i as u32 + 1);
            }
        } else if t.starts_with("<?") || t.ends_with("/>") {
            continue;
        } else if let Some(rest) = t.strip_prefix('<') {
            let name = rest.split([' ', '>']).next().unwrap();
            stack.push(name);
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_serialize_round_trip(
        seed in any::<u64>(),
        labels in proptest::collection::vec("[ -~àéø✓]{0,12}", 0..4),
        count in 1usize..4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..count)
            .map(|i| {
                let (mut t, _) = random_tree(&mut rng, GenConfig::default());
                decorate(&mut t, &labels, i);
                (format!("Tree{i}"), t)
            })
            .collect();
        let doc = doc_from(trees);
        let text = dsl::serialize(&doc);
        let back = dsl::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        // canonical form is a fixed point
        prop_assert_eq!(dsl::serialize(&back), text);
    }

    /// Deleting a closing tag leaves its element unclosed; the error is
    /// reported at the first closing tag that no longer matches.
    #[test]
    fn unclosed_element_error_locus(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, _) = loop {
            let (t, s) = random_tree(&mut rng, GenConfig::default());
            if !t.kind.is_leaf() {
                break (t, s);
            }
        };
        let text = dsl::serialize(&doc_from(vec![("T".into(), tree)]));
        let lines: Vec<&str> = text.lines().collect();
        let closers: Vec<usize> = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                let t = l.trim_start();
                t.starts_with("</") && !t.starts_with("</Tree") && !t.starts_with("</TreeDocument")
            })
            .map(|(i, _)| i)
            .collect();
        let k = closers[pick.index(closers.len())];
        let mutated: Vec<&str> = lines.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, l)| *l).collect();
        let expected_line = first_mismatched_closer(&mutated).expect("mutation must break nesting");
        match dsl::parse(&mutated.join("\n")) {
            Err(DslError::SyntaxError { line, .. }) => prop_assert_eq!(line, expected_line),
            other => prop_assert!(false, "expected SyntaxError, got {:?}", other),
        }
    }
}

#[test]
fn unknown_element_and_stray_text_are_rejected() {
    let bad_el = "<TreeDocument format=\"1\">\n<Tree name=\"t\">\n<Sequense id=\"s\"/>\n</Tree>\n</TreeDocument>";
    assert!(matches!(dsl::parse(bad_el), Err(DslError::SyntaxError { line: 3, .. })));
    let stray = "<TreeDocument format=\"1\">\n<Tree name=\"t\">\noops\n<Action id=\"a\" name=\"A\"/>\n</Tree>\n</TreeDocument>";
    assert!(matches!(dsl::parse(stray), Err(DslError::SyntaxError { .. })));
}

#[test]
fn child_order_survives_round_trip() {
    let tree = TreeNode::fallback(
        "f",
        (0..8).rev().map(|i| TreeNode::action(&format!("a{i}"), "A")).collect(),
    );
    let doc = doc_from(vec![("T".into(), tree)]);
    let back = dsl::parse(&dsl::serialize(&doc)).unwrap();
    let ids: Vec<_> = back.trees["T"].children.iter().map(|c| c.id.as_str().to_string()).collect();
    assert_eq!(ids, ["a7", "a6", "a5", "a4", "a3", "a2", "a1", "a0"]);
}
