//! Graphviz renderings of derivation trees, c-structures, and feature
//! structures. Output depends only on the input, so repeated runs are
//! byte-identical.

use std::fmt::Write;

use crate::feature::FeatureStructure;
use crate::indexed::{DerivationTree, IndexedGrammar, IxLabel};
use crate::symbol::SymbolSet;
use crate::tree::TreeAddress;
use crate::unification::{CStructure, UCat, UnificationGrammar};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_id(x: &TreeAddress) -> String {
    if x.is_root() {
        "n".to_string()
    } else {
        let digits: Vec<String> = x.digits().iter().map(u32::to_string).collect();
        format!("n_{}", digits.join("_"))
    }
}

/// Joins symbol names, without spaces when every name is one character.
fn spell<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let names: Vec<&str> = names.into_iter().collect();
    if names.iter().all(|n| n.chars().count() == 1) {
        names.concat()
    } else {
        names.join(" ")
    }
}

fn tree_edges(out: &mut String, addrs: impl Iterator<Item = TreeAddress>, label: impl Fn(&TreeAddress) -> Option<String>) {
    for x in addrs {
        if let Some(p) = x.parent() {
            match label(&x) {
                Some(l) => writeln!(out, "  {} -> {} [label={}];", node_id(&p), node_id(&x), quote(&l)),
                None => writeln!(out, "  {} -> {};", node_id(&p), node_id(&x)),
            }
            .unwrap();
        }
    }
}

/// Nodes are labeled with their symbol and index string, leaves with their
/// terminal or `ε`.
pub fn derivation_dot(g: &IndexedGrammar, t: &DerivationTree) -> String {
    let mut out = String::from("digraph derivation {\n  node [shape=plaintext];\n");
    for (x, label) in t.labels() {
        let text = match label {
            IxLabel::Node { symbol, stack } if stack.is_empty() => g.nt_name(*symbol).to_string(),
            IxLabel::Node { symbol, stack } => {
                format!("{} {}", g.nt_name(*symbol), spell(stack.iter().map(|i| g.index_name(*i))))
            }
            IxLabel::Leaf(Some(w)) => g.term_name(*w).to_string(),
            IxLabel::Leaf(None) => "ε".to_string(),
        };
        writeln!(out, "  {} [label={}];", node_id(x), quote(&text)).unwrap();
    }
    tree_edges(&mut out, t.labels().keys().cloned(), |_| None);
    out.push_str("}\n");
    out
}

/// Nodes are labeled with their category; each edge into a nonterminal
/// carries the schema its daughter was introduced with.
pub fn cstructure_dot(g: &UnificationGrammar, cs: &CStructure) -> String {
    let mut out = String::from("digraph cstructure {\n  node [shape=plaintext];\n");
    for (x, cat) in cs.categories() {
        let text = match cat {
            UCat::N(a) => g.nt_name(*a).to_string(),
            UCat::Leaf(Some(w)) => g.term_name(*w).to_string(),
            UCat::Leaf(None) => "ε".to_string(),
        };
        writeln!(out, "  {} [label={}];", node_id(x), quote(&text)).unwrap();
    }
    tree_edges(&mut out, cs.categories().keys().cloned(), |x| {
        cs.schema(x).filter(|s| !s.is_empty()).map(|s| g.display_schema(s))
    });
    out.push_str("}\n");
    out
}

/// Nodes are circles, atomic ones labeled with their value. Each name is a
/// separate box with a dashed arrow to the node it denotes.
pub fn feature_dot(fs: &FeatureStructure, attributes: &SymbolSet, values: &SymbolSet) -> String {
    let mut out = String::from("digraph feature {\n  node [shape=circle, label=\"\"];\n");
    for q in 0..fs.node_count() {
        match fs.alpha(q) {
            Some(v) => writeln!(out, "  q{q} [shape=box, label={}];", quote(values.name(v.0))),
            None => writeln!(out, "  q{q};"),
        }
        .unwrap();
    }
    for ((q, a), p) in fs.edges() {
        writeln!(out, "  q{q} -> q{p} [label={}];", quote(attributes.name(a.0))).unwrap();
    }
    for (x, q) in fs.names() {
        let id = format!("x{}", &node_id(x)[1..]);
        writeln!(out, "  {id} [shape=plaintext, label={}];", quote(&x.to_string())).unwrap();
        writeln!(out, "  {id} -> q{q} [style=dashed, arrowhead=none];").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_indexed_grammar, parse_unification_grammar};
    use crate::testdata::{aabbcc_tree, ABC_IXG, DOUBLING_U_UGR};
    use crate::unification::sug_membership;
    use crate::Budget;

    #[test]
    fn derivation_labels_show_index_strings() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let t = aabbcc_tree(&g);
        let dot = derivation_dot(&g, &t);
        assert!(dot.starts_with("digraph derivation {"));
        assert!(dot.contains("[label=\"S' gf\"]"), "{dot}");
        assert!(dot.contains("n -> n_1;"));
        assert_eq!(dot, derivation_dot(&g, &t));
    }

    #[test]
    fn cstructure_and_features() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        let w = vec![g.term("d").unwrap(); 4];
        let (cs, fs) = sug_membership(&g, &w, Budget::default()).unwrap().witness().cloned().unwrap();
        let c = cstructure_dot(&g, &cs);
        assert!(c.contains("dn next = up ; dn idx = $"), "{c}");
        let f = feature_dot(&fs, g.attributes(), g.values());
        assert!(f.contains("label=\"$\""));
        assert!(f.contains("label=\"next\""));
        assert!(f.contains("x [shape=plaintext, label=\"ε\"];"), "{f}");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b\\"), "\"a\\\"b\\\\\"");
    }
}
