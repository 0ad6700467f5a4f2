//! Simple unification grammars.
//!
//! A production `A₀ → A₁ … Aₙ` attaches to each daughter a set of equation
//! schemata over the arrows `↑` (the mother) and `↓` (the daughter). A
//! lexicon rule `A → t` carries value schemata only. A string is generated
//! when some c-structure for it has a consistent set of instantiated
//! equations.

mod cstructure;
mod search;
mod ugi;

pub use cstructure::{CStructure, InvalidCStructure, RuleRef, UCat};
pub use search::{enumerate_cstructures, sug_language_upto, sug_membership, CStructureEnumerator, SugLanguage};
pub use ugi::{
    canonical_fs, canonical_names, classify_schema, sink_map_root, ugi_check, ugi_normalize, NotUgi,
    UgiAttrs, UgiOffence, UgiProperty, UgiReport, UgiSchema,
};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::feature::Equation;
use crate::symbol::{valid_identifier, Attr, Nt, SymbolSet, Term, Value};
use crate::tree::TreeAddress;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arrow {
    Up,
    Down,
}

impl Arrow {
    pub fn keyword(self) -> &'static str {
        match self {
            Arrow::Up => "up",
            Arrow::Down => "dn",
        }
    }
}

/// An equation schema: `↑/↓ψ ≐ ↑/↓ψ′` or `↑/↓ψ ≐ v` with `ψ` non-empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EqSchema {
    Path {
        s1: Arrow,
        p1: Vec<Attr>,
        s2: Arrow,
        p2: Vec<Attr>,
    },
    Val {
        side: Arrow,
        path: Vec<Attr>,
        value: Value,
    },
}

impl EqSchema {
    pub fn copy() -> Self {
        EqSchema::Path {
            s1: Arrow::Up,
            p1: vec![],
            s2: Arrow::Down,
            p2: vec![],
        }
    }
}

pub type Schema = BTreeSet<EqSchema>;

/// `{↑ ≐ ↓}`
pub fn copy_schema() -> Schema {
    BTreeSet::from([EqSchema::copy()])
}

/// `{↓next ≐ ↑, ↓idx ≐ f}`
pub fn push_schema(next: Attr, idx: Attr, f: Value) -> Schema {
    BTreeSet::from([
        EqSchema::Path {
            s1: Arrow::Down,
            p1: vec![next],
            s2: Arrow::Up,
            p2: vec![],
        },
        EqSchema::Val {
            side: Arrow::Down,
            path: vec![idx],
            value: f,
        },
    ])
}

/// `{↑next ≐ ↓, ↑idx ≐ f}`
pub fn pop_schema(next: Attr, idx: Attr, f: Value) -> Schema {
    BTreeSet::from([
        EqSchema::Path {
            s1: Arrow::Up,
            p1: vec![next],
            s2: Arrow::Down,
            p2: vec![],
        },
        EqSchema::Val {
            side: Arrow::Up,
            path: vec![idx],
            value: f,
        },
    ])
}

/// `E[x/↑, xi/↓]`: replaces the arrows by the mother and daughter addresses.
pub fn instantiate(schema: &Schema, mother: &TreeAddress, daughter: &TreeAddress) -> BTreeSet<Equation> {
    debug_assert_eq!(daughter.parent().as_ref(), Some(mother));
    let name = |a: Arrow| match a {
        Arrow::Up => mother.clone(),
        Arrow::Down => daughter.clone(),
    };
    schema
        .iter()
        .map(|e| match e {
            EqSchema::Path { s1, p1, s2, p2 } => Equation::PathEq {
                x1: name(*s1),
                p1: p1.clone(),
                x2: name(*s2),
                p2: p2.clone(),
            },
            EqSchema::Val { side, path, value } => Equation::ValEq {
                x: name(*side),
                path: path.clone(),
                value: *value,
            },
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Daughter {
    pub category: Nt,
    pub schema: Schema,
}

/// `A₀ → A₁ … Aₙ` with one schema set per daughter, `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UProduction {
    pub mother: Nt,
    pub daughters: Vec<Daughter>,
}

/// `A → t` with `t` a terminal or ε and value schemata only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexRule {
    pub mother: Nt,
    pub word: Option<Term>,
    pub schema: Schema,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UGrammarError {
    #[error("`{0}` is declared both as a nonterminal and as a terminal")]
    NotDisjoint(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("{kind} id {id} is out of range")]
    UnknownId { kind: &'static str, id: u32 },
    #[error("a value schema needs a non-empty attribute path")]
    EmptyValuePath,
    #[error("a production needs at least one daughter")]
    NoDaughters,
    #[error("lexicon rules may only carry value schemata")]
    LexiconPathEquation,
}

/// `G = ⟨N, T, P, L, S⟩` over attributes `A` and values `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnificationGrammar {
    nonterminals: SymbolSet,
    terminals: SymbolSet,
    attributes: SymbolSet,
    values: SymbolSet,
    productions: Vec<UProduction>,
    lexicon: Vec<LexRule>,
    start: Nt,
}

impl UnificationGrammar {
    pub fn new(
        nonterminals: SymbolSet,
        terminals: SymbolSet,
        attributes: SymbolSet,
        values: SymbolSet,
        productions: Vec<UProduction>,
        lexicon: Vec<LexRule>,
        start: Nt,
    ) -> Result<Self, UGrammarError> {
        for set in [&nonterminals, &terminals, &attributes, &values] {
            if let Some(bad) = set.names().iter().find(|n| !valid_identifier(n)) {
                return Err(UGrammarError::InvalidIdentifier(bad.clone()));
            }
        }
        if let Some(both) = nonterminals.names().iter().find(|n| terminals.contains(n)) {
            return Err(UGrammarError::NotDisjoint(both.clone()));
        }
        let g = UnificationGrammar {
            nonterminals,
            terminals,
            attributes,
            values,
            productions,
            lexicon,
            start,
        };
        g.check_rules()?;
        Ok(g)
    }

    fn check_rules(&self) -> Result<(), UGrammarError> {
        let check = |kind: &'static str, id: u32, len: usize| {
            if (id as usize) < len {
                Ok(())
            } else {
                Err(UGrammarError::UnknownId { kind, id })
            }
        };
        let nt = |n: Nt| check("nonterminal", n.0, self.nonterminals.len());
        let schema = |s: &Schema| -> Result<(), UGrammarError> {
            for e in s {
                let (paths, value): (Vec<&Vec<Attr>>, Option<Value>) = match e {
                    EqSchema::Path { p1, p2, .. } => (vec![p1, p2], None),
                    EqSchema::Val { path, value, .. } => {
                        if path.is_empty() {
                            return Err(UGrammarError::EmptyValuePath);
                        }
                        (vec![path], Some(*value))
                    }
                };
                for a in paths.into_iter().flatten() {
                    check("attribute", a.0, self.attributes.len())?;
                }
                if let Some(v) = value {
                    check("value", v.0, self.values.len())?;
                }
            }
            Ok(())
        };
        nt(self.start)?;
        for p in &self.productions {
            nt(p.mother)?;
            if p.daughters.is_empty() {
                return Err(UGrammarError::NoDaughters);
            }
            for d in &p.daughters {
                nt(d.category)?;
                schema(&d.schema)?;
            }
        }
        for l in &self.lexicon {
            nt(l.mother)?;
            if let Some(t) = l.word {
                check("terminal", t.0, self.terminals.len())?;
            }
            if l.schema.iter().any(|e| matches!(e, EqSchema::Path { .. })) {
                return Err(UGrammarError::LexiconPathEquation);
            }
            schema(&l.schema)?;
        }
        Ok(())
    }

    pub fn nonterminals(&self) -> &SymbolSet {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &SymbolSet {
        &self.terminals
    }

    pub fn attributes(&self) -> &SymbolSet {
        &self.attributes
    }

    pub fn values(&self) -> &SymbolSet {
        &self.values
    }

    pub fn productions(&self) -> &[UProduction] {
        &self.productions
    }

    pub fn lexicon(&self) -> &[LexRule] {
        &self.lexicon
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

    pub fn attr_name(&self, a: Attr) -> &str {
        self.attributes.name(a.0)
    }

    pub fn value_name(&self, v: Value) -> &str {
        self.values.name(v.0)
    }

    pub fn nt(&self, name: &str) -> Option<Nt> {
        self.nonterminals.get(name).map(Nt)
    }

    pub fn term(&self, name: &str) -> Option<Term> {
        self.terminals.get(name).map(Term)
    }

    pub fn attr(&self, name: &str) -> Option<Attr> {
        self.attributes.get(name).map(Attr)
    }

    pub fn value(&self, name: &str) -> Option<Value> {
        self.values.get(name).map(Value)
    }

    /// True if `name` is used by any symbol class.
    pub fn is_declared(&self, name: &str) -> bool {
        [&self.nonterminals, &self.terminals, &self.attributes, &self.values]
            .iter()
            .any(|s| s.contains(name))
    }

    pub fn display_schema(&self, s: &Schema) -> String {
        if s.is_empty() {
            return "{ }".into();
        }
        let eqs: Vec<String> = s.iter().map(|e| self.display_eq_schema(e)).collect();
        format!("{{ {} }}", eqs.join(" ; "))
    }

    pub fn display_eq_schema(&self, e: &EqSchema) -> String {
        let side = |a: &Arrow, p: &[Attr]| {
            let mut s = a.keyword().to_string();
            for x in p {
                s.push(' ');
                s.push_str(self.attr_name(*x));
            }
            s
        };
        match e {
            EqSchema::Path { s1, p1, s2, p2 } => format!("{} = {}", side(s1, p1), side(s2, p2)),
            EqSchema::Val { side: a, path, value } => {
                format!("{} = {}", side(a, path), self.value_name(*value))
            }
        }
    }

    pub fn display_production(&self, p: &UProduction) -> String {
        let mut s = format!("rule {} ->", self.nt_name(p.mother));
        for d in &p.daughters {
            s.push_str(&format!(" {} {}", self.nt_name(d.category), self.display_schema(&d.schema)));
        }
        s
    }

    pub fn display_lex(&self, l: &LexRule) -> String {
        let word = l.word.map_or("_", |t| self.term_name(t));
        format!(
            "lex {} -> {} {}",
            self.nt_name(l.mother),
            word,
            self.display_schema(&l.schema)
        )
    }

    pub fn display_rule(&self, r: RuleRef) -> String {
        match r {
            RuleRef::Production(i) => self.display_production(&self.productions[i]),
            RuleRef::Lexicon(i) => self.display_lex(&self.lexicon[i]),
        }
    }

    /// All rules rendered with names, sorted.
    pub fn canonical_rules(&self) -> Vec<String> {
        let mut rules: Vec<String> = self
            .productions
            .iter()
            .map(|p| self.display_production(p))
            .chain(self.lexicon.iter().map(|l| self.display_lex(l)))
            .collect();
        rules.sort();
        rules
    }

    /// Structural equality up to rule order and symbol-table order.
    pub fn same_structure(&self, other: &UnificationGrammar) -> bool {
        let names = |s: &SymbolSet| {
            let mut v = s.names().to_vec();
            v.sort();
            v
        };
        names(&self.nonterminals) == names(&other.nonterminals)
            && names(&self.terminals) == names(&other.terminals)
            && names(&self.attributes) == names(&other.attributes)
            && names(&self.values) == names(&other.values)
            && self.nt_name(self.start) == other.nt_name(other.start)
            && self.canonical_rules() == other.canonical_rules()
    }

    /// Rules with the given mother: productions first, then lexicon rules,
    /// each in list order.
    pub fn rules_for(&self, a: Nt) -> impl Iterator<Item = RuleRef> + '_ {
        let prods = self
            .productions
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.mother == a)
            .map(|(i, _)| RuleRef::Production(i));
        let lex = self
            .lexicon
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.mother == a)
            .map(|(i, _)| RuleRef::Lexicon(i));
        prods.chain(lex)
    }
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRef::Production(i) => write!(f, "production {}", i + 1),
            RuleRef::Lexicon(i) => write!(f, "lexicon rule {}", i + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_unification_grammar;
    use crate::testdata::DOUBLING_U_UGR;

    fn a(s: &str) -> TreeAddress {
        s.parse().unwrap()
    }

    #[test]
    fn instantiation_substitutes_arrows() {
        let (next, idx, f) = (Attr(0), Attr(1), Value(0));
        let es = instantiate(&push_schema(next, idx, f), &a("1"), &a("11"));
        assert_eq!(
            es,
            BTreeSet::from([
                Equation::path_eq(a("11"), vec![next], a("1"), vec![]),
                Equation::val_eq(a("11"), vec![idx], f).unwrap(),
            ])
        );
        let es = instantiate(&copy_schema(), &a("ε"), &a("2"));
        assert_eq!(es, BTreeSet::from([Equation::path_eq(a("ε"), vec![], a("2"), vec![])]));
        assert!(instantiate(&Schema::new(), &a("1"), &a("12")).is_empty());
    }

    #[test]
    fn doubling_image_counts() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        assert_eq!(g.productions().len(), 7);
        assert_eq!(g.lexicon().len(), 1);
        let start_rules: Vec<RuleRef> = g.rules_for(g.start()).collect();
        assert_eq!(start_rules, vec![RuleRef::Production(0)]);
    }

    #[test]
    fn lexicon_path_equation_is_rejected() {
        let n: SymbolSet = ["S"].into_iter().collect();
        let t: SymbolSet = ["a"].into_iter().collect();
        let lex = vec![LexRule {
            mother: Nt(0),
            word: Some(Term(0)),
            schema: copy_schema(),
        }];
        let err = UnificationGrammar::new(n, t, SymbolSet::new(), SymbolSet::new(), vec![], lex, Nt(0))
            .unwrap_err();
        assert_eq!(err, UGrammarError::LexiconPathEquation);
    }
}
