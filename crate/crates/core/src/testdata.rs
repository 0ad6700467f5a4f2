//! Fixtures shared by unit tests.

use std::collections::BTreeMap;

use crate::indexed::{DerivationTree, IndexedGrammar, IxLabel};
use crate::tree::TreeAddress;

pub const ABC_IXG: &str = include_str!("../../../fixtures/abc.ixg");
pub const DOUBLING_IXG: &str = include_str!("../../../fixtures/doubling.ixg");
pub const DOUBLING_U_UGR: &str = include_str!("../../../fixtures/doubling_u.ugr");
pub const AGREEMENT_UGR: &str = include_str!("../../../fixtures/agreement.ugr");
pub const WIDE_UGR: &str = include_str!("../../../fixtures/wide.ugr");

/// Builds a derivation tree from `(address, label)` pairs. A label is either
/// `_`, a terminal, or a nonterminal followed by its index stack, top first:
/// `"S' g f"`.
pub fn ix_tree(g: &IndexedGrammar, nodes: &[(&str, &str)]) -> DerivationTree {
    let mut labels = BTreeMap::new();
    for (addr, label) in nodes {
        let addr: TreeAddress = addr.parse().unwrap();
        let tokens: Vec<&str> = label.split_whitespace().collect();
        let label = if tokens == ["_"] {
            IxLabel::Leaf(None)
        } else if let Some(t) = g.term(tokens[0]) {
            IxLabel::Leaf(Some(t))
        } else {
            IxLabel::Node {
                symbol: g.nt(tokens[0]).unwrap(),
                stack: tokens[1..].iter().map(|f| g.index(f).unwrap()).collect(),
            }
        };
        labels.insert(addr, label);
    }
    DerivationTree::new(labels).unwrap()
}

/// The derivation of `aabbcc` in the `a^n b^n c^n` grammar.
pub fn aabbcc_tree(g: &IndexedGrammar) -> DerivationTree {
    ix_tree(
        g,
        &[
            ("ε", "S"),
            ("1", "S' f"),
            ("11", "S' g f"),
            ("111", "A g f"),
            ("1111", "a"),
            ("1112", "A f"),
            ("11121", "a"),
            ("112", "B g f"),
            ("1121", "b"),
            ("1122", "B f"),
            ("11221", "b"),
            ("113", "C g f"),
            ("1131", "c"),
            ("1132", "C f"),
            ("11321", "c"),
        ],
    )
}

/// The derivation of `dddd` in the `d^(2^n)` grammar.
pub fn dddd_tree(g: &IndexedGrammar) -> DerivationTree {
    let mut nodes = vec![
        ("ε".to_string(), "S".to_string()),
        ("1".into(), "A $".into()),
        ("11".into(), "B f $".into()),
        ("111".into(), "B g f $".into()),
    ];
    for i in 1..=2 {
        let c = format!("111{i}");
        nodes.push((c.clone(), "C g f $".into()));
        nodes.push((format!("{c}1"), "C' f $".into()));
        for j in 1..=2 {
            let cc = format!("{c}1{j}");
            nodes.push((cc.clone(), "C f $".into()));
            nodes.push((format!("{cc}1"), "D $".into()));
            nodes.push((format!("{cc}11"), "d".into()));
        }
    }
    let refs: Vec<(&str, &str)> = nodes.iter().map(|(a, l)| (a.as_str(), l.as_str())).collect();
    ix_tree(g, &refs)
}
