use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{IndexedGrammar, IndexedProduction, Symbol};
use crate::symbol::{Ix, Nt, Term};
use crate::tree::{DomainError, TreeAddress, TreeDomain};

/// Node label `C_I(x)`: a nonterminal with its index stack (front = top), or
/// a terminal/ε leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IxLabel {
    Node { symbol: Nt, stack: Vec<Ix> },
    Leaf(Option<Term>),
}

/// Maps each internal address to the position of its licensing production.
pub type License = BTreeMap<TreeAddress, usize>;

/// A derivation tree `⟨D, C_I⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTree {
    domain: TreeDomain,
    labels: BTreeMap<TreeAddress, IxLabel>,
}

/// Which clause of the derivation-tree definition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// The root must be the start symbol with an empty stack.
    Root,
    /// An internal node must be a nonterminal licensed by some production.
    Internal,
    /// A leaf must be a terminal or ε.
    Leaf,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Root => "root",
            Condition::Internal => "internal node",
            Condition::Leaf => "leaf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{condition} condition fails at {address}: {message}")]
pub struct InvalidTree {
    pub address: TreeAddress,
    pub condition: Condition,
    pub message: String,
}

impl DerivationTree {
    pub fn new(labels: BTreeMap<TreeAddress, IxLabel>) -> Result<Self, DomainError> {
        let domain = TreeDomain::new(labels.keys().cloned())?;
        Ok(DerivationTree { domain, labels })
    }

    pub fn domain(&self) -> &TreeDomain {
        &self.domain
    }

    pub fn labels(&self) -> &BTreeMap<TreeAddress, IxLabel> {
        &self.labels
    }

    pub fn label(&self, x: &TreeAddress) -> Option<&IxLabel> {
        self.labels.get(x)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `C_I^sym(x)`; `None` for ε leaves.
    pub fn symbol(&self, x: &TreeAddress) -> Option<Symbol> {
        match self.labels.get(x)? {
            IxLabel::Node { symbol, .. } => Some(Symbol::N(*symbol)),
            IxLabel::Leaf(t) => t.map(Symbol::T),
        }
    }

    /// `C_I^idx(x)`; empty for leaves.
    pub fn index_string(&self, x: &TreeAddress) -> &[Ix] {
        match self.labels.get(x) {
            Some(IxLabel::Node { stack, .. }) => stack,
            _ => &[],
        }
    }

    /// Leaf labels in `≺` order, ε leaves contributing nothing.
    pub fn terminal_string(&self) -> Vec<Term> {
        self.domain
            .term()
            .into_iter()
            .filter_map(|x| match &self.labels[x] {
                IxLabel::Leaf(t) => *t,
                IxLabel::Node { .. } => None,
            })
            .collect()
    }

    /// Checks the tree against `g`, returning the license function.
    ///
    /// Addresses are checked in `≺` order and the first failure is reported.
    /// Where several productions fit a node, the first in grammar order is
    /// the license.
    pub fn validate(&self, g: &IndexedGrammar) -> Result<License, InvalidTree> {
        let root = TreeAddress::root();
        match &self.labels[&root] {
            IxLabel::Node { symbol, stack } if *symbol == g.start() && stack.is_empty() => {}
            _ => {
                return Err(InvalidTree {
                    address: root,
                    condition: Condition::Root,
                    message: format!(
                        "root must be `{}` with an empty index string",
                        g.nt_name(g.start())
                    ),
                })
            }
        }
        let mut license = License::new();
        for x in self.domain.iter() {
            let degree = self.domain.out_degree(x);
            let label = &self.labels[x];
            if degree == 0 {
                if let IxLabel::Node { .. } = label {
                    return Err(InvalidTree {
                        address: x.clone(),
                        condition: Condition::Leaf,
                        message: "a leaf must carry a terminal or ε".into(),
                    });
                }
                continue;
            }
            let IxLabel::Node { symbol, stack } = label else {
                return Err(InvalidTree {
                    address: x.clone(),
                    condition: Condition::Internal,
                    message: "an internal node must carry a nonterminal".into(),
                });
            };
            let children: Vec<&IxLabel> = (1..=degree as u32)
                .map(|i| &self.labels[&x.child(i)])
                .collect();
            let found = g
                .productions()
                .iter()
                .position(|p| licenses(p, *symbol, stack, &children));
            match found {
                Some(p) => {
                    license.insert(x.clone(), p);
                }
                None => {
                    return Err(InvalidTree {
                        address: x.clone(),
                        condition: Condition::Internal,
                        message: format!(
                            "no production licenses `{}` with its {} daughter(s)",
                            g.nt_name(*symbol),
                            degree
                        ),
                    })
                }
            }
        }
        Ok(license)
    }
}

/// Does `p` license a node `A γ` with these daughter labels?
fn licenses(p: &IndexedProduction, symbol: Nt, stack: &[Ix], children: &[&IxLabel]) -> bool {
    if p.lhs() != symbol {
        return false;
    }
    match p {
        IndexedProduction::Push { rhs, index, .. } => match children {
            [IxLabel::Node {
                symbol: b,
                stack: theta,
            }] => {
                b == rhs
                    && theta.len() == stack.len() + 1
                    && theta[0] == *index
                    && theta[1..] == *stack
            }
            _ => false,
        },
        IndexedProduction::Pop { index, rhs, .. } => match stack.split_first() {
            Some((top, rest)) if top == index => daughters_match(rhs, rest, children),
            _ => false,
        },
        IndexedProduction::Plain { rhs, .. } => daughters_match(rhs, stack, children),
    }
}

fn daughters_match(rhs: &[Symbol], stack: &[Ix], children: &[&IxLabel]) -> bool {
    if rhs.is_empty() {
        return matches!(children, [IxLabel::Leaf(None)]);
    }
    rhs.len() == children.len()
        && rhs.iter().zip(children).all(|(s, c)| match (s, c) {
            (Symbol::N(b), IxLabel::Node { symbol, stack: th }) => b == symbol && th == stack,
            (Symbol::T(t), IxLabel::Leaf(Some(u))) => t == u,
            _ => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_indexed_grammar;
    use crate::testdata::{aabbcc_tree, ABC_IXG};

    fn a(s: &str) -> TreeAddress {
        s.parse().unwrap()
    }

    #[test]
    fn aabbcc_tree_validates() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let t = aabbcc_tree(&g);
        let license = t.validate(&g).unwrap();
        let root_rule = &g.productions()[license[&TreeAddress::root()]];
        assert_eq!(g.display_production(root_rule), "S -> S' ^f");
        let word: Vec<&str> = t.terminal_string().iter().map(|&x| g.term_name(x)).collect();
        assert_eq!(word.concat(), "aabbcc");
        assert_eq!(license.len(), t.len() - 6);
    }

    #[test]
    fn relabeled_root_fails_condition_i() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let t = aabbcc_tree(&g);
        let mut labels = t.labels().clone();
        labels.insert(
            TreeAddress::root(),
            IxLabel::Node {
                symbol: g.nt("S'").unwrap(),
                stack: vec![],
            },
        );
        let err = DerivationTree::new(labels).unwrap().validate(&g).unwrap_err();
        assert_eq!(err.condition, Condition::Root);
    }

    #[test]
    fn swapped_stack_fails_condition_ii() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let t = aabbcc_tree(&g);
        let (f, gg) = (g.index("f").unwrap(), g.index("g").unwrap());
        let mut labels = t.labels().clone();
        // node 111 is A with stack gf
        labels.insert(
            a("111"),
            IxLabel::Node {
                symbol: g.nt("A").unwrap(),
                stack: vec![f, gg],
            },
        );
        let err = DerivationTree::new(labels).unwrap().validate(&g).unwrap_err();
        assert_eq!(err.condition, Condition::Internal);
        // the mother 11 no longer licenses its daughters
        assert_eq!(err.address, a("11"));
    }

    #[test]
    fn epsilon_leaf_yields_empty_string() {
        let g = parse_indexed_grammar("nonterminals S\nterminals a\nindices\nstart S\nS -> _\n")
            .unwrap();
        let mut labels = BTreeMap::new();
        labels.insert(
            TreeAddress::root(),
            IxLabel::Node {
                symbol: g.start(),
                stack: vec![],
            },
        );
        labels.insert(a("1"), IxLabel::Leaf(None));
        let t = DerivationTree::new(labels).unwrap();
        assert!(t.validate(&g).is_ok());
        assert!(t.terminal_string().is_empty());
    }

    #[test]
    fn nonterminal_leaf_fails_condition_iii() {
        let g = parse_indexed_grammar("nonterminals S A\nterminals a\nindices\nstart S\nS -> A\nA -> a\n")
            .unwrap();
        let mut labels = BTreeMap::new();
        labels.insert(
            TreeAddress::root(),
            IxLabel::Node {
                symbol: g.start(),
                stack: vec![],
            },
        );
        labels.insert(
            a("1"),
            IxLabel::Node {
                symbol: g.nt("A").unwrap(),
                stack: vec![],
            },
        );
        let err = DerivationTree::new(labels).unwrap().validate(&g).unwrap_err();
        assert_eq!(err.condition, Condition::Leaf);
    }
}
