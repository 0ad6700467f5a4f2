//! Seeded random generators for grammars, c-structures, and equation sets.
//! The same seed always yields the same instance.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::feature::{Equation, Path};
use crate::indexed::{IndexedGrammar, IndexedProduction, Symbol};
use crate::symbol::{Attr, Ix, Nt, SymbolSet, Term, Value};
use crate::tree::TreeAddress;
use crate::unification::{
    copy_schema, pop_schema, push_schema, CStructure, Daughter, EqSchema, LexRule, RuleRef, Schema, UCat, UProduction,
    UnificationGrammar,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NONTERMINALS: [&str; 6] = ["S", "A", "B", "C", "D", "E"];
const TERMINALS: [&str; 3] = ["a", "b", "c"];
const INDICES: [&str; 3] = ["f", "g", "h"];
const DOLLAR: &str = "$";

#[derive(Clone, Copy, Debug)]
pub struct GrammarParams {
    /// Upper bound on nonterminals, the start symbol included.
    pub nonterminals: usize,
    /// Upper bound on indices other than the end marker.
    pub indices: usize,
    /// Upper bound on rules, the start rule and lexicon rules included.
    pub rules: usize,
    pub terminals: usize,
    /// Give every nonterminal other than the start symbol a lexicon rule,
    /// beyond the rule bound if needed, so every partial tree can be closed.
    pub lexicon_everywhere: bool,
}

impl Default for GrammarParams {
    fn default() -> Self {
        GrammarParams {
            nonterminals: 4,
            indices: 2,
            rules: 8,
            terminals: 2,
            lexicon_everywhere: false,
        }
    }
}

/// Rule shapes shared by both formalisms. Nonterminal 0 is the start
/// symbol; index `k` (one past the ordinary indices) is the end marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Push(usize, usize, usize),
    Pop(usize, usize, usize),
    Binary(usize, usize, usize),
    Lex(usize, Option<usize>),
}

struct Shapes {
    nonterminals: usize,
    indices: usize,
    terminals: usize,
    rules: Vec<Shape>,
}

/// The start rule pushes the end marker; every other rule mentions neither
/// the start symbol nor the marker, and every ordinary index occurs.
fn random_shapes(rng: &mut impl Rng, p: GrammarParams) -> Shapes {
    let n = rng.gen_range(2..=p.nonterminals.clamp(2, NONTERMINALS.len()));
    let k = rng.gen_range(0..=p.indices.min(INDICES.len()));
    let t = p.terminals.clamp(1, TERMINALS.len());
    let total = rng.gen_range(2..=p.rules.max(2)).max(k + 1);
    let nt = |rng: &mut dyn rand::RngCore| rng.gen_range(1..n);
    let mut rules = vec![Shape::Push(0, 1, k)];
    let mut attempts = 0;
    while rules.len() < total && attempts < 100 {
        attempts += 1;
        let forced = rules.len() - 1 < k;
        let kind = if forced { rng.gen_range(0..2) } else { rng.gen_range(0..4) };
        let f = if forced { rules.len() - 1 } else { rng.gen_range(0..k.max(1)) };
        let shape = match kind {
            0 if k > 0 => Shape::Push(nt(rng), nt(rng), f),
            1 if k > 0 => Shape::Pop(nt(rng), nt(rng), f),
            2 => Shape::Binary(nt(rng), nt(rng), nt(rng)),
            _ => {
                let word = (rng.gen_range(0..6) > 0).then(|| rng.gen_range(0..t));
                Shape::Lex(nt(rng), word)
            }
        };
        if !rules.contains(&shape) {
            rules.push(shape);
        }
    }
    if p.lexicon_everywhere {
        for a in 1..n {
            if !rules.iter().any(|r| matches!(r, Shape::Lex(b, _) if *b == a)) {
                rules.push(Shape::Lex(a, Some(rng.gen_range(0..t))));
            }
        }
    }
    Shapes {
        nonterminals: n,
        indices: k,
        terminals: t,
        rules,
    }
}

fn symbols(names: &[&str]) -> SymbolSet {
    let mut s = SymbolSet::new();
    for n in names {
        s.intern(n);
    }
    s
}

fn index_names(k: usize) -> Vec<&'static str> {
    INDICES[..k].iter().copied().chain([DOLLAR]).collect()
}

/// A random indexed grammar on reduced form with a marked index-end.
pub fn random_indexed_grammar(rng: &mut impl Rng, p: GrammarParams) -> IndexedGrammar {
    let s = random_shapes(rng, p);
    let n = |i: usize| Nt(i as u32);
    let productions = s
        .rules
        .iter()
        .map(|r| match *r {
            Shape::Push(a, b, f) => IndexedProduction::Push {
                lhs: n(a),
                rhs: n(b),
                index: Ix(f as u32),
            },
            Shape::Pop(a, b, f) => IndexedProduction::Pop {
                lhs: n(a),
                index: Ix(f as u32),
                rhs: vec![Symbol::N(n(b))],
            },
            Shape::Binary(a, b, c) => IndexedProduction::Plain {
                lhs: n(a),
                rhs: vec![Symbol::N(n(b)), Symbol::N(n(c))],
            },
            Shape::Lex(a, w) => IndexedProduction::Plain {
                lhs: n(a),
                rhs: w.map(|t| Symbol::T(Term(t as u32))).into_iter().collect(),
            },
        })
        .collect();
    IndexedGrammar::new(
        symbols(&NONTERMINALS[..s.nonterminals]),
        symbols(&TERMINALS[..s.terminals]),
        symbols(&index_names(s.indices)),
        productions,
        Nt(0),
    )
    .expect("generated grammar is well formed")
}

/// A random UGI grammar on reduced form with a sink-mapped root whose
/// attributes are `next` and `idx` and whose values all occur in rules.
pub fn random_ugi_grammar(rng: &mut impl Rng, p: GrammarParams) -> UnificationGrammar {
    let s = random_shapes(rng, p);
    let attributes = symbols(&["next", "idx"]);
    let (next, idx) = (Attr(0), Attr(1));
    let n = |i: usize| Nt(i as u32);
    let v = |f: usize| Value(f as u32);
    let unary = |a: usize, b: usize, schema: Schema| UProduction {
        mother: n(a),
        daughters: vec![Daughter {
            category: n(b),
            schema,
        }],
    };
    let mut productions = Vec::new();
    let mut lexicon = Vec::new();
    for r in &s.rules {
        match *r {
            Shape::Push(a, b, f) => productions.push(unary(a, b, push_schema(next, idx, v(f)))),
            Shape::Pop(a, b, f) => productions.push(unary(a, b, pop_schema(next, idx, v(f)))),
            Shape::Binary(a, b, c) => productions.push(UProduction {
                mother: n(a),
                daughters: [b, c]
                    .into_iter()
                    .map(|d| Daughter {
                        category: n(d),
                        schema: copy_schema(),
                    })
                    .collect(),
            }),
            Shape::Lex(a, w) => lexicon.push(LexRule {
                mother: n(a),
                word: w.map(|t| Term(t as u32)),
                schema: Schema::new(),
            }),
        }
    }
    UnificationGrammar::new(
        symbols(&NONTERMINALS[..s.nonterminals]),
        symbols(&TERMINALS[..s.terminals]),
        attributes,
        symbols(&index_names(s.indices)),
        productions,
        lexicon,
        Nt(0),
    )
    .expect("generated grammar is well formed")
}

/// A random indexed grammar in no particular form: rules have up to three
/// daughters mixing terminals and nonterminals, and the start symbol may
/// occur anywhere.
pub fn random_indexed_loose(rng: &mut impl Rng, p: GrammarParams) -> IndexedGrammar {
    let n = rng.gen_range(1..=p.nonterminals.clamp(1, NONTERMINALS.len()));
    let k = rng.gen_range(1..=p.indices.clamp(1, INDICES.len()));
    let t = p.terminals.clamp(1, TERMINALS.len());
    let count = rng.gen_range(1..=p.rules.max(1));
    let mut productions = Vec::new();
    for _ in 0..count {
        let lhs = Nt(rng.gen_range(0..n) as u32);
        let index = Ix(rng.gen_range(0..k) as u32);
        let len = rng.gen_range(0..=3);
        let rhs: Vec<Symbol> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Symbol::N(Nt(rng.gen_range(0..n) as u32))
                } else {
                    Symbol::T(Term(rng.gen_range(0..t) as u32))
                }
            })
            .collect();
        let rule = match rng.gen_range(0..3) {
            0 => IndexedProduction::Push {
                lhs,
                rhs: Nt(rng.gen_range(0..n) as u32),
                index,
            },
            1 => IndexedProduction::Pop { lhs, index, rhs },
            _ => IndexedProduction::Plain { lhs, rhs },
        };
        if !productions.contains(&rule) {
            productions.push(rule);
        }
    }
    IndexedGrammar::new(
        symbols(&NONTERMINALS[..n]),
        symbols(&TERMINALS[..t]),
        symbols(&INDICES[..k]),
        productions,
        Nt(0),
    )
    .expect("generated grammar is well formed")
}

/// A random UGI grammar in no particular form: productions have one to
/// three daughters, each with a copy, push, or pop schema written in either
/// orientation, and the start symbol may occur anywhere.
pub fn random_ugi_loose(rng: &mut impl Rng, p: GrammarParams) -> UnificationGrammar {
    let n = rng.gen_range(1..=p.nonterminals.clamp(1, NONTERMINALS.len()));
    let k = rng.gen_range(1..=p.indices.clamp(1, INDICES.len()));
    let t = p.terminals.clamp(1, TERMINALS.len());
    let (next, idx) = (Attr(0), Attr(1));
    let count = rng.gen_range(1..=p.rules.max(1));
    let mut productions: Vec<UProduction> = Vec::new();
    let mut lexicon: Vec<LexRule> = Vec::new();
    for _ in 0..count {
        let mother = Nt(rng.gen_range(0..n) as u32);
        if rng.gen_bool(0.3) {
            let word = rng.gen_bool(0.85).then(|| Term(rng.gen_range(0..t) as u32));
            let rule = LexRule {
                mother,
                word,
                schema: Schema::new(),
            };
            if !lexicon.contains(&rule) {
                lexicon.push(rule);
            }
            continue;
        }
        let daughters = (0..rng.gen_range(1..=3))
            .map(|_| {
                let v = Value(rng.gen_range(0..k) as u32);
                let schema = match rng.gen_range(0..3) {
                    0 => copy_schema(),
                    1 => push_schema(next, idx, v),
                    _ => pop_schema(next, idx, v),
                };
                let schema = schema.into_iter().map(|e| if rng.gen_bool(0.5) { flip(e) } else { e }).collect();
                Daughter {
                    category: Nt(rng.gen_range(0..n) as u32),
                    schema,
                }
            })
            .collect();
        let rule = UProduction { mother, daughters };
        if !productions.contains(&rule) {
            productions.push(rule);
        }
    }
    if lexicon.is_empty() {
        lexicon.push(LexRule {
            mother: Nt(rng.gen_range(0..n) as u32),
            word: Some(Term(0)),
            schema: Schema::new(),
        });
    }
    UnificationGrammar::new(
        symbols(&NONTERMINALS[..n]),
        symbols(&TERMINALS[..t]),
        symbols(&["next", "idx"]),
        symbols(&INDICES[..k]),
        productions,
        lexicon,
        Nt(0),
    )
    .expect("generated grammar is well formed")
}

/// The same equation with its two sides exchanged.
fn flip(e: EqSchema) -> EqSchema {
    match e {
        EqSchema::Path { s1, p1, s2, p2 } => EqSchema::Path {
            s1: s2,
            p1: p2,
            s2: s1,
            p2: p1,
        },
        v => v,
    }
}

/// A random c-structure of `g` rooted in the start symbol, consistent or
/// not. Below `max_depth` only lexicon rules are used; `None` when some
/// nonterminal there has none.
pub fn random_cstructure(rng: &mut impl Rng, g: &UnificationGrammar, max_depth: usize) -> Option<CStructure> {
    let mut cats = BTreeMap::new();
    let mut rules = BTreeMap::new();
    let mut stack = vec![(TreeAddress::root(), g.start())];
    while let Some((x, a)) = stack.pop() {
        cats.insert(x.clone(), UCat::N(a));
        let choices: Vec<RuleRef> = g
            .rules_for(a)
            .filter(|r| x.depth() < max_depth || matches!(r, RuleRef::Lexicon(_)))
            .collect();
        let rule = *choices.choose(rng)?;
        rules.insert(x.clone(), rule);
        match rule {
            RuleRef::Production(i) => {
                for (j, d) in g.productions()[i].daughters.iter().enumerate() {
                    stack.push((x.child(j as u32 + 1), d.category));
                }
            }
            RuleRef::Lexicon(i) => {
                cats.insert(x.child(1), UCat::Leaf(g.lexicon()[i].word));
            }
        }
    }
    Some(CStructure::new(g, cats, rules).expect("generated c-structure follows the grammar"))
}

#[derive(Clone, Copy, Debug)]
pub struct EquationParams {
    pub names: usize,
    pub attributes: usize,
    pub values: usize,
    pub max_equations: usize,
    /// Upper bound on the summed length of all paths.
    pub total_path_len: usize,
    /// Upper bound on distinct terms (names and every path prefix from
    /// them). A consistent set then has a model with at most this many
    /// nodes.
    pub max_terms: usize,
}

impl Default for EquationParams {
    fn default() -> Self {
        EquationParams {
            names: 3,
            attributes: 2,
            values: 2,
            max_equations: 4,
            total_path_len: 6,
            max_terms: 4,
        }
    }
}

/// A path of length at least `min` and at most 3, charged to `budget`.
fn random_path(rng: &mut impl Rng, min: usize, budget: &mut usize, attributes: usize) -> Path {
    let len = rng.gen_range(min..=(*budget).clamp(min, 3));
    *budget = budget.saturating_sub(len);
    (0..len).map(|_| Attr(rng.gen_range(0..attributes) as u32)).collect()
}

/// The names of `es` and every prefix of every path applied to them.
pub fn terms(es: &BTreeSet<Equation>) -> BTreeSet<(TreeAddress, Path)> {
    let mut out = BTreeSet::new();
    let mut add = |x: &TreeAddress, p: &Path| {
        for i in 0..=p.len() {
            out.insert((x.clone(), p[..i].to_vec()));
        }
    };
    for e in es {
        match e {
            Equation::PathEq { x1, p1, x2, p2 } => {
                add(x1, p1);
                add(x2, p2);
            }
            Equation::ValEq { x, path, .. } => add(x, path),
        }
    }
    out
}

/// A random equation set over names `1`, `2`, … and the attributes and
/// values numbered from 0, with its name domain. Sets with too many terms
/// are redrawn.
pub fn random_equations<R: Rng>(rng: &mut R, p: EquationParams) -> (BTreeSet<Equation>, BTreeSet<TreeAddress>) {
    loop {
        let count = rng.gen_range(1..=p.max_equations.max(1));
        let mut budget = p.total_path_len;
        let mut es = BTreeSet::new();
        for _ in 0..count {
            let name = |rng: &mut R| TreeAddress::root().child(rng.gen_range(1..=p.names) as u32);
            if p.values > 0 && budget > 0 && rng.gen_bool(0.4) {
                let x = name(rng);
                let path = random_path(rng, 1, &mut budget, p.attributes);
                let v = Value(rng.gen_range(0..p.values) as u32);
                es.insert(Equation::val_eq(x, path, v).expect("path is non-empty"));
            } else {
                let x1 = name(rng);
                let p1 = random_path(rng, 0, &mut budget, p.attributes);
                let x2 = name(rng);
                let p2 = random_path(rng, 0, &mut budget, p.attributes);
                es.insert(Equation::path_eq(x1, p1, x2, p2));
            }
        }
        if terms(&es).len() <= p.max_terms {
            let names = es.iter().flat_map(|e| e.names()).cloned().collect();
            return (es, names);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unification::ugi_check;

    #[test]
    fn generators_are_deterministic() {
        let p = GrammarParams::default();
        let a = random_indexed_grammar(&mut rng(7), p);
        let b = random_indexed_grammar(&mut rng(7), p);
        assert_eq!(a.canonical_rules(), b.canonical_rules());
        let e1 = random_equations(&mut rng(3), EquationParams::default());
        let e2 = random_equations(&mut rng(3), EquationParams::default());
        assert_eq!(e1, e2);
    }

    #[test]
    fn generated_grammars_meet_their_contracts() {
        for seed in 0..200 {
            let g = random_indexed_grammar(&mut rng(seed), GrammarParams::default());
            assert!(g.reduced_form_check().is_reduced(), "{:?}", g.canonical_rules());
            assert!(g.marked_index_end_check(), "{:?}", g.canonical_rules());
            assert!(g.productions().len() <= 8 && g.nonterminals().len() <= 4 && g.indices().len() <= 3);
            let u = random_ugi_grammar(&mut rng(seed), GrammarParams::default());
            let r = ugi_check(&u);
            assert!(r.is_ugi && r.is_reduced && r.has_sink_mapped_root, "{:?}", r.offenders);
            let loose = random_ugi_loose(&mut rng(seed), GrammarParams::default());
            assert!(ugi_check(&loose).is_ugi, "{:?}", loose.canonical_rules());
            random_indexed_loose(&mut rng(seed), GrammarParams::default());
        }
    }

    #[test]
    fn cstructures_and_equations() {
        let p = GrammarParams {
            lexicon_everywhere: true,
            ..GrammarParams::default()
        };
        for seed in 0..50 {
            let g = random_ugi_grammar(&mut rng(seed), p);
            assert!(random_cstructure(&mut rng(seed), &g, 4).is_some());
            let (es, names) = random_equations(&mut rng(seed), EquationParams::default());
            assert!(terms(&es).len() <= 4);
            assert!(es.iter().flat_map(|e| e.names()).all(|x| names.contains(x)));
            let len: usize = es
                .iter()
                .map(|e| match e {
                    Equation::PathEq { p1, p2, .. } => p1.len() + p2.len(),
                    Equation::ValEq { path, .. } => path.len(),
                })
                .sum();
            assert!(len <= 6);
        }
    }
}
