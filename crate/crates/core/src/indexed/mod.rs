//! Indexed grammars.
//!
//! An indexed grammar is a context-free grammar whose nonterminal nodes carry
//! a stack of index symbols. Push rules `A → B f` prepend `f` to the stack of
//! the single daughter, pop rules `A f → α` consume the top index and hand
//! the rest to nonterminal daughters, and plain rules `A → α` copy the stack.
//! Terminal daughters always get the empty stack.

mod derivation;
mod search;

pub use derivation::{Condition, DerivationTree, InvalidTree, IxLabel, License};
pub use search::{
    enumerate_derivations, indexed_language_upto, indexed_membership, DerivationEnumerator,
    IndexedLanguage, Membership,
};

use std::fmt;

use thiserror::Error;

use crate::symbol::{fresh_name, valid_identifier, Ix, Nt, SymbolSet, Term};

/// A right-hand-side symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    N(Nt),
    T(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IndexedProduction {
    /// `A → B f`
    Push { lhs: Nt, rhs: Nt, index: Ix },
    /// `A f → α`
    Pop {
        lhs: Nt,
        index: Ix,
        rhs: Vec<Symbol>,
    },
    /// `A → α`
    Plain { lhs: Nt, rhs: Vec<Symbol> },
}

impl IndexedProduction {
    pub fn lhs(&self) -> Nt {
        match self {
            IndexedProduction::Push { lhs, .. }
            | IndexedProduction::Pop { lhs, .. }
            | IndexedProduction::Plain { lhs, .. } => *lhs,
        }
    }

    /// The index pushed or popped, if any.
    pub fn index(&self) -> Option<Ix> {
        match self {
            IndexedProduction::Push { index, .. } | IndexedProduction::Pop { index, .. } => {
                Some(*index)
            }
            IndexedProduction::Plain { .. } => None,
        }
    }

    /// The daughters; a push rule has exactly one nonterminal daughter.
    pub fn daughters(&self) -> Vec<Symbol> {
        match self {
            IndexedProduction::Push { rhs, .. } => vec![Symbol::N(*rhs)],
            IndexedProduction::Pop { rhs, .. } | IndexedProduction::Plain { rhs, .. } => {
                rhs.clone()
            }
        }
    }

    fn mentions_nonterminal(&self, nt: Nt) -> bool {
        self.lhs() == nt || self.daughters().contains(&Symbol::N(nt))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("`{name}` is declared both as {first} and as {second}")]
    NotDisjoint {
        name: String,
        first: &'static str,
        second: &'static str,
    },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("{kind} id {id} is out of range")]
    UnknownId { kind: &'static str, id: u32 },
    #[error("{0}")]
    Shape(String),
}

/// `G = ⟨N, T, I, P, S⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedGrammar {
    nonterminals: SymbolSet,
    terminals: SymbolSet,
    indices: SymbolSet,
    productions: Vec<IndexedProduction>,
    start: Nt,
}

impl IndexedGrammar {
    pub fn new(
        nonterminals: SymbolSet,
        terminals: SymbolSet,
        indices: SymbolSet,
        productions: Vec<IndexedProduction>,
        start: Nt,
    ) -> Result<Self, GrammarError> {
        let classes = [
            ("a nonterminal", &nonterminals),
            ("a terminal", &terminals),
            ("an index", &indices),
        ];
        for (i, (first, set)) in classes.iter().enumerate() {
            for name in set.names() {
                if !valid_identifier(name) {
                    return Err(GrammarError::InvalidIdentifier(name.clone()));
                }
                for (second, other) in &classes[i + 1..] {
                    if other.contains(name) {
                        return Err(GrammarError::NotDisjoint {
                            name: name.clone(),
                            first,
                            second,
                        });
                    }
                }
            }
        }
        let g = IndexedGrammar {
            nonterminals,
            terminals,
            indices,
            productions,
            start,
        };
        g.check_ids()?;
        Ok(g)
    }

    fn check_ids(&self) -> Result<(), GrammarError> {
        let nt_ok = |n: Nt| {
            if n.index() < self.nonterminals.len() {
                Ok(())
            } else {
                Err(GrammarError::UnknownId {
                    kind: "nonterminal",
                    id: n.0,
                })
            }
        };
        nt_ok(self.start)?;
        for p in &self.productions {
            nt_ok(p.lhs())?;
            if let Some(ix) = p.index() {
                if ix.index() >= self.indices.len() {
                    return Err(GrammarError::UnknownId {
                        kind: "index",
                        id: ix.0,
                    });
                }
            }
            for s in p.daughters() {
                match s {
                    Symbol::N(n) => nt_ok(n)?,
                    Symbol::T(t) if t.index() >= self.terminals.len() => {
                        return Err(GrammarError::UnknownId {
                            kind: "terminal",
                            id: t.0,
                        })
                    }
                    Symbol::T(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn nonterminals(&self) -> &SymbolSet {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &SymbolSet {
        &self.terminals
    }

    pub fn indices(&self) -> &SymbolSet {
        &self.indices
    }

    pub fn productions(&self) -> &[IndexedProduction] {
        &self.productions
    }

    pub fn start(&self) -> Nt {
        self.start
    }

    pub fn nt_name(&self, n: Nt) -> &str {
        self.nonterminals.name(n.0)
    }

    pub fn term_name(&self, t: Term) -> &str {
        self.terminals.name(t.0)
    }

    pub fn index_name(&self, i: Ix) -> &str {
        self.indices.name(i.0)
    }

    pub fn nt(&self, name: &str) -> Option<Nt> {
        self.nonterminals.get(name).map(Nt)
    }

    pub fn term(&self, name: &str) -> Option<Term> {
        self.terminals.get(name).map(Term)
    }

    pub fn index(&self, name: &str) -> Option<Ix> {
        self.indices.get(name).map(Ix)
    }

    /// True if `name` is used by any symbol class.
    pub fn is_declared(&self, name: &str) -> bool {
        self.nonterminals.contains(name) || self.terminals.contains(name) || self.indices.contains(name)
    }

    pub fn display_production(&self, p: &IndexedProduction) -> String {
        ProductionDisplay { g: self, p }.to_string()
    }

    /// Checks each production against the reduced forms
    /// `A → B f`, `A f → B`, `A → B C` and `A → t` with `t ∈ T ∪ {ε}`.
    pub fn reduced_form_check(&self) -> ReducedFormReport {
        let mut offenders = Vec::new();
        for (i, p) in self.productions.iter().enumerate() {
            let reason = match p {
                IndexedProduction::Push { .. } => None,
                IndexedProduction::Pop { rhs, .. } => match rhs.as_slice() {
                    [Symbol::N(_)] => None,
                    _ => Some("a pop rule must have exactly one nonterminal daughter"),
                },
                IndexedProduction::Plain { rhs, .. } => match rhs.as_slice() {
                    [Symbol::N(_), Symbol::N(_)] | [Symbol::T(_)] | [] => None,
                    _ => Some("a plain rule must be A -> B C or A -> t with t a terminal or ε"),
                },
            };
            if let Some(reason) = reason {
                offenders.push(RuleOffence {
                    rule: i,
                    reason: reason.to_string(),
                });
            }
        }
        ReducedFormReport { offenders }
    }

    /// If the grammar has a marked index-end, returns the position of the
    /// unique start rule `S → A $` and the index `$`.
    pub fn marked_index_end(&self) -> Option<(usize, Ix)> {
        let mut with_start = self
            .productions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.mentions_nonterminal(self.start));
        let (pos, rule) = with_start.next()?;
        if with_start.next().is_some() {
            return None;
        }
        let IndexedProduction::Push { lhs, index, .. } = rule else {
            return None;
        };
        if *lhs != self.start {
            return None;
        }
        let elsewhere = self
            .productions
            .iter()
            .enumerate()
            .any(|(i, p)| i != pos && p.index() == Some(*index));
        if elsewhere {
            None
        } else {
            Some((pos, *index))
        }
    }

    pub fn marked_index_end_check(&self) -> bool {
        self.marked_index_end().is_some()
    }

    /// Adds a fresh start symbol `S_0` with the single rule `S_0 → S $` for a
    /// fresh index `$`. The language is unchanged, the result has a marked
    /// index-end, and reduced form is preserved.
    pub fn mark_index_end(&self) -> IndexedGrammar {
        let s0 = fresh_name(&format!("{}_0", self.nt_name(self.start)), |n| {
            self.is_declared(n)
        });
        let dollar = fresh_name("$", |n| self.is_declared(n) || n == s0);
        let mut nonterminals = self.nonterminals.clone();
        let new_start = Nt(nonterminals.intern(&s0));
        let mut indices = self.indices.clone();
        let dollar = Ix(indices.intern(&dollar));
        let mut productions = self.productions.clone();
        productions.push(IndexedProduction::Push {
            lhs: new_start,
            rhs: self.start,
            index: dollar,
        });
        IndexedGrammar::new(
            nonterminals,
            self.terminals.clone(),
            indices,
            productions,
            new_start,
        )
        .expect("fresh names keep the grammar valid")
    }

    /// Productions rendered with names, sorted: equal for grammars that differ
    /// only in rule order and symbol-table order.
    pub fn canonical_rules(&self) -> Vec<String> {
        let mut rules: Vec<String> = self
            .productions
            .iter()
            .map(|p| self.display_production(p))
            .collect();
        rules.sort();
        rules
    }

    /// Structural equality up to rule order and symbol-table order.
    pub fn same_structure(&self, other: &IndexedGrammar) -> bool {
        let names = |s: &SymbolSet| {
            let mut v = s.names().to_vec();
            v.sort();
            v
        };
        names(&self.nonterminals) == names(&other.nonterminals)
            && names(&self.terminals) == names(&other.terminals)
            && names(&self.indices) == names(&other.indices)
            && self.nt_name(self.start) == other.nt_name(other.start)
            && self.canonical_rules() == other.canonical_rules()
    }
}

struct ProductionDisplay<'a> {
    g: &'a IndexedGrammar,
    p: &'a IndexedProduction,
}

impl fmt::Display for ProductionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.g;
        let rhs = |f: &mut fmt::Formatter<'_>, rhs: &[Symbol]| {
            if rhs.is_empty() {
                return f.write_str(" _");
            }
            for s in rhs {
                match s {
                    Symbol::N(n) => write!(f, " {}", g.nt_name(*n))?,
                    Symbol::T(t) => write!(f, " {}", g.term_name(*t))?,
                }
            }
            Ok(())
        };
        match self.p {
            IndexedProduction::Push { lhs, rhs, index } => write!(
                f,
                "{} -> {} ^{}",
                g.nt_name(*lhs),
                g.nt_name(*rhs),
                g.index_name(*index)
            ),
            IndexedProduction::Pop { lhs, index, rhs: r } => {
                write!(f, "{} ^{} ->", g.nt_name(*lhs), g.index_name(*index))?;
                rhs(f, r)
            }
            IndexedProduction::Plain { lhs, rhs: r } => {
                write!(f, "{} ->", g.nt_name(*lhs))?;
                rhs(f, r)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOffence {
    /// Position in the production list.
    pub rule: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedFormReport {
    pub offenders: Vec<RuleOffence>,
}

impl ReducedFormReport {
    pub fn is_reduced(&self) -> bool {
        self.offenders.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_indexed_grammar;
    use crate::testdata::{ABC_IXG, DOUBLING_IXG};

    #[test]
    fn abc_is_not_reduced() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let report = g.reduced_form_check();
        assert!(!report.is_reduced());
        let offending: Vec<String> = report
            .offenders
            .iter()
            .map(|o| g.display_production(&g.productions()[o.rule]))
            .collect();
        assert!(offending.contains(&"A ^g -> a A".to_string()));
        assert!(offending.contains(&"S' -> A B C".to_string()));
        // Af -> a style rules are pops with a terminal daughter: also not reduced.
        assert_eq!(offending.len(), 7);
    }

    #[test]
    fn doubling_is_reduced_and_marked() {
        let g = parse_indexed_grammar(DOUBLING_IXG).unwrap();
        assert!(g.reduced_form_check().is_reduced());
        assert!(g.marked_index_end_check());
        let (pos, dollar) = g.marked_index_end().unwrap();
        assert_eq!(pos, 0);
        assert_eq!(g.index_name(dollar), "$");
    }

    #[test]
    fn abc_has_no_marked_end() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        assert!(!g.marked_index_end_check());
    }

    #[test]
    fn single_terminal_rule_is_reduced() {
        let g = parse_indexed_grammar("nonterminals S\nterminals a\nindices\nstart S\nS -> a\n")
            .unwrap();
        assert!(g.reduced_form_check().is_reduced());
    }

    #[test]
    fn two_start_rules_are_not_marked() {
        let g = parse_indexed_grammar(
            "nonterminals S A\nterminals a\nindices $\nstart S\nS -> A ^$\nS -> a\nA -> a\n",
        )
        .unwrap();
        assert!(!g.marked_index_end_check());
    }

    #[test]
    fn mark_index_end_adds_one_rule() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let m = g.mark_index_end();
        assert_eq!(m.productions().len(), 10);
        assert_eq!(m.nt_name(m.start()), "S_0");
        assert!(m.index("$").is_some());
        assert!(m.marked_index_end_check());

        let twice = m.mark_index_end();
        assert_eq!(twice.nt_name(twice.start()), "S_0_0");
        assert_eq!(twice.index_name(twice.marked_index_end().unwrap().1), "$_1");
    }

    #[test]
    fn mark_index_end_keeps_reduced_form() {
        let g = parse_indexed_grammar(DOUBLING_IXG).unwrap();
        assert!(g.mark_index_end().reduced_form_check().is_reduced());
    }

    #[test]
    fn disjointness_is_enforced() {
        let n: SymbolSet = ["S"].into_iter().collect();
        let t: SymbolSet = ["a"].into_iter().collect();
        let i: SymbolSet = ["a"].into_iter().collect();
        let err = IndexedGrammar::new(n, t, i, vec![], Nt(0)).unwrap_err();
        assert!(matches!(err, GrammarError::NotDisjoint { .. }));
    }
}
