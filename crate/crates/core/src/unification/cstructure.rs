use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{instantiate, Schema, UnificationGrammar};
use crate::feature::{solve, Equation, SolveResult};
use crate::symbol::{Nt, Term};
use crate::tree::{TreeAddress, TreeDomain};

/// Category `C_U(x)`: a nonterminal, or a terminal/ε at a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UCat {
    N(Nt),
    Leaf(Option<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleRef {
    Production(usize),
    Lexicon(usize),
}

/// A c-structure `⟨D, C_U, E_U⟩`. Each internal node records the rule that
/// licenses it, and each non-root node the schema of its slot in that rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CStructure {
    domain: TreeDomain,
    cats: BTreeMap<TreeAddress, UCat>,
    rules: BTreeMap<TreeAddress, RuleRef>,
    schemas: BTreeMap<TreeAddress, Schema>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid c-structure at {address}: {message}")]
pub struct InvalidCStructure {
    pub address: TreeAddress,
    pub message: String,
}

impl CStructure {
    /// Builds and checks a c-structure from categories and the licensing
    /// rule of every internal node.
    pub fn new(
        g: &UnificationGrammar,
        cats: BTreeMap<TreeAddress, UCat>,
        rules: BTreeMap<TreeAddress, RuleRef>,
    ) -> Result<Self, InvalidCStructure> {
        let fail = |x: &TreeAddress, m: String| InvalidCStructure {
            address: x.clone(),
            message: m,
        };
        let root = TreeAddress::root();
        let domain = TreeDomain::new(cats.keys().cloned()).map_err(|e| fail(&root, e.to_string()))?;
        if cats.get(&root) != Some(&UCat::N(g.start())) {
            return Err(fail(&root, format!("root must be `{}`", g.nt_name(g.start()))));
        }
        let mut schemas = BTreeMap::new();
        for x in domain.iter() {
            let degree = domain.out_degree(x);
            if degree == 0 {
                if !matches!(cats[x], UCat::Leaf(_)) {
                    return Err(fail(x, "a leaf must carry a terminal or ε".into()));
                }
                if rules.contains_key(x) {
                    return Err(fail(x, "a leaf has no licensing rule".into()));
                }
                continue;
            }
            let UCat::N(a) = cats[x] else {
                return Err(fail(x, "an internal node must carry a nonterminal".into()));
            };
            let Some(&rule) = rules.get(x) else {
                return Err(fail(x, "missing licensing rule".into()));
            };
            let child = |i: usize| x.child(i as u32 + 1);
            match rule {
                RuleRef::Production(i) => {
                    let p = g
                        .productions()
                        .get(i)
                        .ok_or_else(|| fail(x, format!("no {rule}")))?;
                    let fits = p.mother == a
                        && p.daughters.len() == degree
                        && p.daughters
                            .iter()
                            .enumerate()
                            .all(|(k, d)| cats[&child(k)] == UCat::N(d.category));
                    if !fits {
                        return Err(fail(x, format!("{rule} does not fit the node")));
                    }
                    for (k, d) in p.daughters.iter().enumerate() {
                        schemas.insert(child(k), d.schema.clone());
                    }
                }
                RuleRef::Lexicon(i) => {
                    let l = g.lexicon().get(i).ok_or_else(|| fail(x, format!("no {rule}")))?;
                    if l.mother != a || degree != 1 || cats[&child(0)] != UCat::Leaf(l.word) {
                        return Err(fail(x, format!("{rule} does not fit the node")));
                    }
                    schemas.insert(child(0), l.schema.clone());
                }
            }
        }
        if let Some(x) = rules.keys().find(|x| !domain.contains(x) || domain.out_degree(x) == 0) {
            return Err(fail(x, "rule given for a node that is not internal".into()));
        }
        Ok(CStructure {
            domain,
            cats,
            rules,
            schemas,
        })
    }

    pub fn domain(&self) -> &TreeDomain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.cats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cats.is_empty()
    }

    pub fn categories(&self) -> &BTreeMap<TreeAddress, UCat> {
        &self.cats
    }

    pub fn category(&self, x: &TreeAddress) -> Option<UCat> {
        self.cats.get(x).copied()
    }

    pub fn rules(&self) -> &BTreeMap<TreeAddress, RuleRef> {
        &self.rules
    }

    pub fn rule(&self, x: &TreeAddress) -> Option<RuleRef> {
        self.rules.get(x).copied()
    }

    /// `E_U(x)` for non-root `x`.
    pub fn schema(&self, x: &TreeAddress) -> Option<&Schema> {
        self.schemas.get(x)
    }

    pub fn schemas(&self) -> &BTreeMap<TreeAddress, Schema> {
        &self.schemas
    }

    /// Leaf categories in `≺` order, ε leaves contributing nothing.
    pub fn terminal_string(&self) -> Vec<Term> {
        self.domain
            .term()
            .into_iter()
            .filter_map(|x| match self.cats[x] {
                UCat::Leaf(t) => t,
                UCat::N(_) => None,
            })
            .collect()
    }

    /// `⋃ E′_U(x)` over all non-root nodes.
    pub fn collect_equations(&self) -> BTreeSet<Equation> {
        let mut out = BTreeSet::new();
        for (x, s) in &self.schemas {
            let mother = x.parent().expect("schemas are attached to non-root nodes");
            out.extend(instantiate(s, &mother, x));
        }
        out
    }

    pub fn addresses(&self) -> BTreeSet<TreeAddress> {
        self.cats.keys().cloned().collect()
    }

    /// Solves the collected equations over the addresses of the tree.
    pub fn generates_check(&self) -> SolveResult {
        solve(&self.collect_equations(), &self.addresses())
            .expect("instantiated names are addresses of the tree")
    }
}
