//! Unification grammars for indexed languages: grammars whose schemata only
//! copy the mother (`{↑≐↓}`), push a value onto it (`{↓next≐↑, ↓idx≐f}`) or
//! pop one from it (`{↑next≐↓, ↑idx≐f}`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::{
    copy_schema, push_schema, Arrow, CStructure, Daughter, EqSchema, LexRule, RuleRef, Schema,
    UProduction, UnificationGrammar,
};
use crate::feature::{Diagnosis, FeatureStructure, NodeId, PathTerm, SolveResult};
use crate::symbol::{fresh_name, Attr, Nt, SymbolSet, Value};
use crate::tree::TreeAddress;

/// The shape of a UGI schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UgiSchema {
    Copy,
    Push(Value),
    Pop(Value),
}

/// The attribute pair shared by every push and pop schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UgiAttrs {
    pub next: Attr,
    pub idx: Attr,
}

/// Classifies one schema, returning its shape and, for push and pop, the
/// `next`/`idx` attributes it uses. Path equations may be written either
/// way round.
pub fn classify_schema(s: &Schema) -> Option<(UgiSchema, Option<UgiAttrs>)> {
    let bare = |e: &EqSchema| match e {
        EqSchema::Path { s1, p1, s2, p2 } if p1.is_empty() && p2.is_empty() => Some((*s1, *s2)),
        _ => None,
    };
    let mut it = s.iter();
    match (it.next(), it.next(), it.next()) {
        (Some(e), None, None) => match bare(e) {
            Some((a, b)) if a != b => Some((UgiSchema::Copy, None)),
            _ => None,
        },
        (Some(a), Some(b), None) => {
            let (link, val) = match (a, b) {
                (EqSchema::Path { .. }, EqSchema::Val { .. }) => (a, b),
                (EqSchema::Val { .. }, EqSchema::Path { .. }) => (b, a),
                _ => return None,
            };
            // `side next ≐ other` in either orientation
            let (side, next) = match link {
                EqSchema::Path { s1, p1, s2, p2 } if s1 != s2 => match (&p1[..], &p2[..]) {
                    ([n], []) => (*s1, *n),
                    ([], [n]) => (*s2, *n),
                    _ => return None,
                },
                _ => return None,
            };
            let EqSchema::Val {
                side: vside,
                path,
                value,
            } = val
            else {
                return None;
            };
            let [idx] = path[..] else {
                return None;
            };
            if *vside != side || idx == next {
                return None;
            }
            let shape = match side {
                Arrow::Down => UgiSchema::Push(*value),
                Arrow::Up => UgiSchema::Pop(*value),
            };
            Some((shape, Some(UgiAttrs { next, idx })))
        }
        _ => None,
    }
}

/// Which of the three grammar properties a rule violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum UgiProperty {
    Ugi,
    Reduced,
    SinkMappedRoot,
}

impl fmt::Display for UgiProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UgiProperty::Ugi => "ugi",
            UgiProperty::Reduced => "reduced-form",
            UgiProperty::SinkMappedRoot => "sink-mapped-root",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UgiOffence {
    pub property: UgiProperty,
    /// `None` when the problem is not tied to one rule.
    pub rule: Option<RuleRef>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UgiReport {
    pub is_ugi: bool,
    pub is_reduced: bool,
    pub has_sink_mapped_root: bool,
    pub offenders: Vec<UgiOffence>,
    /// The shared `next`/`idx` pair, if any push or pop schema occurs.
    pub attrs: Option<UgiAttrs>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("not a UGI grammar: {0}")]
pub struct NotUgi(pub String);

/// Classifies every production daughter of a grammar already known to be
/// UGI.
pub(crate) fn production_shapes(g: &UnificationGrammar) -> Vec<Vec<UgiSchema>> {
    g.productions()
        .iter()
        .map(|p| {
            p.daughters
                .iter()
                .map(|d| classify_schema(&d.schema).expect("grammar is UGI").0)
                .collect()
        })
        .collect()
}

pub fn ugi_check(g: &UnificationGrammar) -> UgiReport {
    let mut offenders = Vec::new();
    let mut attrs: Option<UgiAttrs> = None;
    let mut shapes: Vec<Option<Vec<UgiSchema>>> = Vec::new();
    for (i, p) in g.productions().iter().enumerate() {
        let rule = Some(RuleRef::Production(i));
        let mut ds = Vec::new();
        for (k, d) in p.daughters.iter().enumerate() {
            match classify_schema(&d.schema) {
                None => offenders.push(UgiOffence {
                    property: UgiProperty::Ugi,
                    rule,
                    reason: format!(
                        "schema {} of daughter {} is not a copy, push or pop",
                        g.display_schema(&d.schema),
                        k + 1
                    ),
                }),
                Some((shape, used)) => {
                    if let Some(used) = used {
                        match attrs {
                            None => attrs = Some(used),
                            Some(first) if first != used => offenders.push(UgiOffence {
                                property: UgiProperty::Ugi,
                                rule,
                                reason: format!(
                                    "daughter {} uses `{}`/`{}` where the grammar uses `{}`/`{}`",
                                    k + 1,
                                    g.attr_name(used.next),
                                    g.attr_name(used.idx),
                                    g.attr_name(first.next),
                                    g.attr_name(first.idx)
                                ),
                            }),
                            Some(_) => {}
                        }
                    }
                    ds.push(shape);
                }
            }
        }
        shapes.push((ds.len() == p.daughters.len()).then_some(ds));
    }
    for (i, l) in g.lexicon().iter().enumerate() {
        if !l.schema.is_empty() {
            offenders.push(UgiOffence {
                property: UgiProperty::Ugi,
                rule: Some(RuleRef::Lexicon(i)),
                reason: "lexicon rule with a non-empty schema".into(),
            });
        }
    }
    let is_ugi = offenders.is_empty();
    if !is_ugi {
        return UgiReport {
            is_ugi,
            is_reduced: false,
            has_sink_mapped_root: false,
            offenders,
            attrs,
        };
    }
    let shapes: Vec<Vec<UgiSchema>> = shapes.into_iter().map(Option::unwrap).collect();

    for (i, ds) in shapes.iter().enumerate() {
        let ok = matches!(
            ds[..],
            [UgiSchema::Push(_)] | [UgiSchema::Pop(_)] | [UgiSchema::Copy, UgiSchema::Copy]
        );
        if !ok {
            offenders.push(UgiOffence {
                property: UgiProperty::Reduced,
                rule: Some(RuleRef::Production(i)),
                reason: "not a unary push or pop nor a binary copy rule".into(),
            });
        }
    }
    let is_reduced = offenders.is_empty();

    let before = offenders.len();
    let start = g.start();
    let with_start: Vec<RuleRef> = g
        .productions()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.mother == start || p.daughters.iter().any(|d| d.category == start))
        .map(|(i, _)| RuleRef::Production(i))
        .chain(
            g.lexicon()
                .iter()
                .enumerate()
                .filter(|(_, l)| l.mother == start)
                .map(|(i, _)| RuleRef::Lexicon(i)),
        )
        .collect();
    let sink_offence = |rule, reason: &str| UgiOffence {
        property: UgiProperty::SinkMappedRoot,
        rule,
        reason: reason.into(),
    };
    match with_start[..] {
        [RuleRef::Production(i)] => {
            let p = &g.productions()[i];
            match shapes[i][..] {
                [UgiSchema::Push(dollar)] if p.mother == start => {
                    for (j, ds) in shapes.iter().enumerate() {
                        let uses = ds
                            .iter()
                            .any(|s| matches!(s, UgiSchema::Push(v) | UgiSchema::Pop(v) if *v == dollar));
                        if j != i && uses {
                            offenders.push(sink_offence(
                                Some(RuleRef::Production(j)),
                                &format!("uses the root value `{}`", g.value_name(dollar)),
                            ));
                        }
                    }
                }
                _ => offenders.push(sink_offence(
                    Some(RuleRef::Production(i)),
                    "the start rule must push a value onto its only daughter",
                )),
            }
        }
        [RuleRef::Lexicon(i)] => offenders.push(sink_offence(
            Some(RuleRef::Lexicon(i)),
            "the start symbol has only a lexicon rule",
        )),
        [] => offenders.push(sink_offence(None, "the start symbol occurs in no rule")),
        _ => {
            for r in &with_start {
                offenders.push(sink_offence(Some(*r), "the start symbol occurs in more than one rule"));
            }
        }
    }
    let has_sink_mapped_root = offenders.len() == before;
    UgiReport {
        is_ugi,
        is_reduced,
        has_sink_mapped_root,
        offenders,
        attrs,
    }
}

fn require_ugi(g: &UnificationGrammar) -> Result<UgiReport, NotUgi> {
    let report = ugi_check(g);
    if report.is_ugi {
        return Ok(report);
    }
    let o = &report.offenders[0];
    Err(NotUgi(match o.rule {
        Some(r) => format!("{r} ({}): {}", g.display_rule(r), o.reason),
        None => o.reason.clone(),
    }))
}

/// Hands out fresh nonterminal names `X_1`, `X_2`, ... skipping names in use.
struct FreshNames {
    counter: usize,
}

impl FreshNames {
    fn next(&mut self, taken: &SymbolSet, g: &UnificationGrammar) -> String {
        loop {
            self.counter += 1;
            let name = format!("X_{}", self.counter);
            if !taken.contains(&name) && !g.is_declared(&name) {
                return name;
            }
        }
    }
}

/// Rewrites a UGI grammar into reduced form with the same language:
/// push and pop daughters of wider rules move below fresh unary rules, copy
/// rules wider than two are binarized, and unary copy rules are removed by
/// composing them with the rules of their daughter.
pub fn ugi_normalize(g: &UnificationGrammar) -> Result<UnificationGrammar, NotUgi> {
    require_ugi(g)?;
    let shapes = production_shapes(g);
    let mut nonterminals = g.nonterminals().clone();
    let mut fresh = FreshNames { counter: 0 };
    let mut new_nt = |nts: &mut SymbolSet| {
        let name = fresh.next(nts, g);
        Nt(nts.intern(&name))
    };
    let copy = |category: Nt| Daughter {
        category,
        schema: copy_schema(),
    };

    // detach push and pop daughters of rules with two or more daughters
    let mut detached: Vec<UProduction> = Vec::new();
    let mut extra: Vec<UProduction> = Vec::new();
    for (p, ds) in g.productions().iter().zip(&shapes) {
        if p.daughters.len() < 2 {
            detached.push(p.clone());
            continue;
        }
        let mut daughters = Vec::new();
        for (d, shape) in p.daughters.iter().zip(ds) {
            if *shape == UgiSchema::Copy {
                daughters.push(d.clone());
            } else {
                let x = new_nt(&mut nonterminals);
                extra.push(UProduction {
                    mother: x,
                    daughters: vec![d.clone()],
                });
                daughters.push(copy(x));
            }
        }
        detached.push(UProduction {
            mother: p.mother,
            daughters,
        });
    }
    detached.extend(extra);

    // binarize wide copy rules
    let mut binary: Vec<UProduction> = Vec::new();
    for p in detached {
        if p.daughters.len() <= 2 {
            binary.push(p);
            continue;
        }
        let mut mother = p.mother;
        let n = p.daughters.len();
        for d in p.daughters.iter().take(n - 2) {
            let x = new_nt(&mut nonterminals);
            binary.push(UProduction {
                mother,
                daughters: vec![d.clone(), copy(x)],
            });
            mother = x;
        }
        binary.push(UProduction {
            mother,
            daughters: p.daughters[n - 2..].to_vec(),
        });
    }

    // eliminate unary copy rules
    let is_unit = |p: &UProduction| {
        p.daughters.len() == 1 && matches!(classify_schema(&p.daughters[0].schema), Some((UgiSchema::Copy, _)))
    };
    let n = nonterminals.len();
    let mut reach = vec![BTreeSet::new(); n];
    for p in binary.iter().filter(|p| is_unit(p)) {
        reach[p.mother.index()].insert(p.daughters[0].category);
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            let via: Vec<Nt> = reach[a].iter().flat_map(|b| reach[b.index()].iter().copied()).collect();
            for c in via {
                changed |= reach[a].insert(c);
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<UProduction> = binary.iter().filter(|p| !is_unit(p)).cloned().collect();
    let mut productions = kept.clone();
    let mut seen: std::collections::HashSet<UProduction> = kept.iter().cloned().collect();
    let mut lexicon: Vec<LexRule> = g.lexicon().to_vec();
    let mut seen_lex: std::collections::HashSet<LexRule> = lexicon.iter().cloned().collect();
    for (a, targets) in reach.iter().enumerate() {
        let a = Nt(a as u32);
        for &b in targets {
            if b == a {
                continue;
            }
            for p in kept.iter().filter(|p| p.mother == b) {
                let q = UProduction {
                    mother: a,
                    daughters: p.daughters.clone(),
                };
                if seen.insert(q.clone()) {
                    productions.push(q);
                }
            }
            for l in g.lexicon().iter().filter(|l| l.mother == b) {
                let m = LexRule {
                    mother: a,
                    ..l.clone()
                };
                if seen_lex.insert(m.clone()) {
                    lexicon.push(m);
                }
            }
        }
    }
    let out = UnificationGrammar::new(
        nonterminals,
        g.terminals().clone(),
        g.attributes().clone(),
        g.values().clone(),
        productions,
        lexicon,
        g.start(),
    )
    .expect("normalization keeps the grammar valid");
    debug_assert!(ugi_check(&out).is_reduced);
    Ok(out)
}

/// Gives a UGI grammar a sink-mapped root: a fresh start symbol pushes a
/// fresh value onto a fresh `S′`, which may push any value used in the
/// grammar before handing over to the old start symbol next to an ε
/// daughter.
pub fn sink_map_root(g: &UnificationGrammar) -> Result<UnificationGrammar, NotUgi> {
    let report = require_ugi(g)?;
    let s = g.nt_name(g.start()).to_string();
    let mut chosen: Vec<String> = Vec::new();
    let pick = |base: String, chosen: &mut Vec<String>| {
        let name = fresh_name(&base, |n| g.is_declared(n) || chosen.iter().any(|c| c == n));
        chosen.push(name.clone());
        name
    };
    let s0 = pick(format!("{s}_0"), &mut chosen);
    let s1 = pick(format!("{s}'"), &mut chosen);
    let se = pick(format!("{s}_eps"), &mut chosen);
    let dollar = pick("$".into(), &mut chosen);

    let mut attributes = g.attributes().clone();
    let attrs = match report.attrs {
        Some(a) => a,
        None => {
            let next = pick("next".into(), &mut chosen);
            let idx = pick("idx".into(), &mut chosen);
            UgiAttrs {
                next: Attr(attributes.intern(&next)),
                idx: Attr(attributes.intern(&idx)),
            }
        }
    };
    let used: BTreeSet<Value> = production_shapes(g)
        .into_iter()
        .flatten()
        .filter_map(|s| match s {
            UgiSchema::Push(v) | UgiSchema::Pop(v) => Some(v),
            UgiSchema::Copy => None,
        })
        .collect();

    let mut nonterminals = g.nonterminals().clone();
    let s0 = Nt(nonterminals.intern(&s0));
    let s1 = Nt(nonterminals.intern(&s1));
    let se = Nt(nonterminals.intern(&se));
    let mut values = g.values().clone();
    let dollar = Value(values.intern(&dollar));
    let push = |v: Value| push_schema(attrs.next, attrs.idx, v);

    let mut productions = g.productions().to_vec();
    productions.push(UProduction {
        mother: s0,
        daughters: vec![Daughter {
            category: s1,
            schema: push(dollar),
        }],
    });
    productions.push(UProduction {
        mother: s1,
        daughters: vec![
            Daughter {
                category: g.start(),
                schema: copy_schema(),
            },
            Daughter {
                category: se,
                schema: copy_schema(),
            },
        ],
    });
    for v in used {
        productions.push(UProduction {
            mother: s1,
            daughters: vec![Daughter {
                category: s1,
                schema: push(v),
            }],
        });
    }
    let mut lexicon = g.lexicon().to_vec();
    lexicon.push(LexRule {
        mother: se,
        word: None,
        schema: Schema::new(),
    });
    Ok(UnificationGrammar::new(
        nonterminals,
        g.terminals().clone(),
        attributes,
        values,
        productions,
        lexicon,
        s0,
    )
    .expect("fresh names keep the grammar valid"))
}

/// Address sequences with the head at the end of the vector.
type Seq = Vec<TreeAddress>;

/// The name mapping of the canonical feature structure: each address maps
/// to a sequence of addresses, the root to `n + 1` copies of `ε`.
pub fn canonical_names(cs: &CStructure) -> Result<BTreeMap<TreeAddress, Vec<TreeAddress>>, NotUgi> {
    let (m, _, _) = canonical_parts(cs)?;
    Ok(m
        .into_iter()
        .map(|(x, mut s)| {
            s.reverse();
            (x, s)
        })
        .collect())
}

type Demands = Vec<(Seq, Value, PathTerm)>;

fn canonical_parts(cs: &CStructure) -> Result<(BTreeMap<TreeAddress, Seq>, BTreeSet<Seq>, Demands), NotUgi> {
    let root = TreeAddress::root();
    let height = cs.domain().height();
    let mut m: BTreeMap<TreeAddress, Seq> = BTreeMap::new();
    m.insert(root.clone(), vec![root; height + 1]);
    let mut attrs: Option<UgiAttrs> = None;
    let mut next_from: BTreeSet<Seq> = BTreeSet::new();
    let mut demands: Demands = Vec::new();
    // `≺` order visits mothers before daughters
    for x in cs.domain().iter() {
        let Some(mother) = x.parent() else { continue };
        let schema = cs.schema(x).expect("non-root nodes carry a schema");
        let (shape, used) = if schema.is_empty() {
            // lexicon leaves are isolated
            m.insert(x.clone(), vec![x.clone()]);
            continue;
        } else {
            classify_schema(schema).ok_or_else(|| NotUgi(format!("schema at {x} is not a copy, push or pop")))?
        };
        if let Some(used) = used {
            match attrs {
                None => attrs = Some(used),
                Some(a) if a != used => {
                    return Err(NotUgi(format!("schema at {x} uses a different next/idx pair")))
                }
                Some(_) => {}
            }
        }
        let mseq = m[&mother].clone();
        let idx = |a: &Option<UgiAttrs>| a.expect("set by push or pop").idx;
        let seq = match shape {
            UgiSchema::Copy => mseq,
            UgiSchema::Pop(f) => {
                assert!(mseq.len() > 1, "pop below the bottom of the root sequence");
                next_from.insert(mseq.clone());
                demands.push((mseq.clone(), f, PathTerm { name: mother.clone(), path: vec![idx(&attrs)] }));
                let mut s = mseq;
                s.pop();
                s
            }
            UgiSchema::Push(f) => {
                let mut s = mseq;
                s.push(x.clone());
                next_from.insert(s.clone());
                demands.push((s.clone(), f, PathTerm { name: x.clone(), path: vec![idx(&attrs)] }));
                s
            }
        };
        m.insert(x.clone(), seq);
    }
    Ok((m, next_from, demands))
}

/// The canonical feature structure of a UGI c-structure: nodes are the
/// address sequences reachable from the named ones, `next` pops a sequence
/// and `idx` leads to the value demanded for it. Two different demands on
/// one sequence make the c-structure inconsistent.
///
/// Only `next` edges demanded by some push or pop are kept, so a consistent
/// result has exactly the shape of the least model of the c-structure's
/// equations.
pub fn canonical_fs(cs: &CStructure) -> Result<SolveResult, NotUgi> {
    let (m, next_from, demands) = canonical_parts(cs)?;
    let attrs = {
        // recover the attribute pair from any push or pop schema
        cs.schemas().values().find_map(|s| classify_schema(s).and_then(|(_, a)| a))
    };
    let mut idx_of: HashMap<&Seq, (Value, &PathTerm)> = HashMap::new();
    for (q, f, term) in &demands {
        match idx_of.get(q) {
            Some(&(g, _)) if g != *f => {
                let (a, b) = if g < *f { (g, *f) } else { (*f, g) };
                return Ok(SolveResult::Inconsistent(Diagnosis::ValueClash(term.clone(), a, b)));
            }
            Some(_) => {}
            None => {
                idx_of.insert(q, (*f, term));
            }
        }
    }
    let mut fs = FeatureStructure::new();
    let mut ids: HashMap<Seq, NodeId> = HashMap::new();
    let mut value_ids: BTreeMap<Value, NodeId> = BTreeMap::new();
    let mut queue: std::collections::VecDeque<Seq> = std::collections::VecDeque::new();
    let mut intern = |q: &Seq, fs: &mut FeatureStructure, queue: &mut std::collections::VecDeque<Seq>| {
        *ids.entry(q.clone()).or_insert_with(|| {
            queue.push_back(q.clone());
            fs.add_node()
        })
    };
    for (x, q) in &m {
        let id = intern(q, &mut fs, &mut queue);
        fs.set_name(x.clone(), id);
    }
    while let Some(q) = queue.pop_front() {
        let id = intern(&q, &mut fs, &mut queue);
        let Some(attrs) = attrs else { continue };
        if next_from.contains(&q) {
            let mut p = q.clone();
            p.pop();
            let t = intern(&p, &mut fs, &mut queue);
            fs.set_edge(id, attrs.next, t);
        }
        if let Some(&(f, _)) = idx_of.get(&q) {
            let v = *value_ids.entry(f).or_insert_with(|| {
                let v = fs.add_node();
                fs.set_value(v, f);
                v
            });
            fs.set_edge(id, attrs.idx, v);
        }
    }
    let root_single = vec![TreeAddress::root()];
    assert!(
        !idx_of.contains_key(&root_single),
        "the one-element root sequence never carries an idx value"
    );
    debug_assert!(fs.well_defined_check().is_well_defined());
    Ok(SolveResult::Consistent(fs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_unification_grammar;
    use crate::testdata::{AGREEMENT_UGR, DOUBLING_U_UGR, WIDE_UGR};
    use crate::unification::{sug_language_upto, sug_membership};
    use crate::Budget;

    #[test]
    fn doubling_image_has_all_properties() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        let r = ugi_check(&g);
        assert!(r.is_ugi && r.is_reduced && r.has_sink_mapped_root, "{r:?}");
        assert!(r.offenders.is_empty());
    }

    #[test]
    fn general_grammar_is_not_ugi() {
        let g = parse_unification_grammar(AGREEMENT_UGR).unwrap();
        let r = ugi_check(&g);
        assert!(!r.is_ugi && !r.is_reduced && !r.has_sink_mapped_root);
        assert!(r.offenders.iter().any(|o| o.rule == Some(RuleRef::Production(0))));
        assert!(ugi_normalize(&g).is_err());
        assert!(sink_map_root(&g).is_err());
    }

    #[test]
    fn two_start_rules_are_not_sink_mapped() {
        let src = "nonterminals S A\nterminals a\nattributes next idx\nvalues $\nstart S\n\
                   rule S -> A { dn next = up ; dn idx = $ }\nrule S -> A { up = dn } A { up = dn }\n\
                   lex A -> a { }\n";
        let g = parse_unification_grammar(src).unwrap();
        let r = ugi_check(&g);
        assert!(r.is_ugi && r.is_reduced && !r.has_sink_mapped_root);
    }

    #[test]
    fn orientation_does_not_matter() {
        let (n, i, f) = (Attr(0), Attr(1), Value(0));
        let flipped: Schema = BTreeSet::from([
            EqSchema::Path {
                s1: Arrow::Up,
                p1: vec![],
                s2: Arrow::Down,
                p2: vec![n],
            },
            EqSchema::Val {
                side: Arrow::Down,
                path: vec![i],
                value: f,
            },
        ]);
        assert_eq!(classify_schema(&flipped).unwrap().0, UgiSchema::Push(f));
        assert_eq!(classify_schema(&push_schema(n, i, f)).unwrap().0, UgiSchema::Push(f));
        assert_eq!(classify_schema(&super::super::pop_schema(n, i, f)).unwrap().0, UgiSchema::Pop(f));
        assert_eq!(classify_schema(&push_schema(n, n, f)), None);
        assert_eq!(classify_schema(&Schema::new()), None);
    }

    fn words(g: &UnificationGrammar, maxlen: usize) -> BTreeSet<String> {
        let exact = crate::lang::exact_ugi_language(g, maxlen, 1_000_000).unwrap();
        let bounded = sug_language_upto(g, maxlen, Budget::new(40, 200_000)).words;
        assert!(bounded.is_subset(&exact));
        exact
            .iter()
            .map(|w| w.iter().map(|&t| g.term_name(t)).collect::<String>())
            .collect()
    }

    #[test]
    fn normalization_of_the_wide_grammar() {
        let g = parse_unification_grammar(WIDE_UGR).unwrap();
        assert!(!ugi_check(&g).is_reduced);
        let n = ugi_normalize(&g).unwrap();
        let r = ugi_check(&n);
        assert!(r.is_reduced, "{r:?}");
        assert_eq!(words(&g, 4), words(&n, 4));
        assert!(words(&g, 4).contains("ab"));
    }

    #[test]
    fn three_copies_become_two_binary_rules() {
        let src = "nonterminals A B C D\nterminals b c d\nattributes\nvalues\nstart A\n\
                   rule A -> B { up = dn } C { up = dn } D { up = dn }\n\
                   lex B -> b { }\nlex C -> c { }\nlex D -> d { }\n";
        let g = parse_unification_grammar(src).unwrap();
        let n = ugi_normalize(&g).unwrap();
        assert_eq!(n.productions().len(), 2);
        assert_eq!(n.display_production(&n.productions()[0]), "rule A -> B { up = dn } X_1 { up = dn }");
        assert_eq!(n.display_production(&n.productions()[1]), "rule X_1 -> C { up = dn } D { up = dn }");
        assert_eq!(words(&n, 4), BTreeSet::from(["bcd".to_string()]));
    }

    #[test]
    fn unit_copies_in_either_orientation_are_removed() {
        let src = "nonterminals S A\nterminals a\nattributes next idx\nvalues f\nstart S\n\
                   rule S -> A { dn = up }\nrule A -> A { dn next = up ; dn idx = f }\nlex A -> a { }\n";
        let g = parse_unification_grammar(src).unwrap();
        let n = ugi_normalize(&g).unwrap();
        assert!(ugi_check(&n).is_reduced);
        assert_eq!(words(&g, 3), words(&n, 3));
    }

    #[test]
    fn reduced_grammar_is_unchanged() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        assert_eq!(ugi_normalize(&g).unwrap(), g);
    }

    #[test]
    fn sink_mapping_adds_five_rules() {
        let src = "nonterminals S A\nterminals a\nattributes next idx\nvalues f g\nstart S\n\
                   rule S -> A { dn next = up ; dn idx = f }\nrule A -> A { dn next = up ; dn idx = g }\n\
                   rule A -> S { up next = dn ; up idx = g }\nlex S -> a { }\nlex A -> _ { }\n";
        let g = parse_unification_grammar(src).unwrap();
        assert!(!ugi_check(&g).has_sink_mapped_root);
        let s = sink_map_root(&g).unwrap();
        let added = s.productions().len() + s.lexicon().len() - g.productions().len() - g.lexicon().len();
        assert_eq!(added, 5);
        let r = ugi_check(&s);
        assert!(r.is_ugi && r.is_reduced && r.has_sink_mapped_root, "{r:?}");
        assert_eq!(s.nt_name(s.start()), "S_0");
        assert_eq!(words(&g, 4), words(&s, 4));
    }

    #[test]
    fn canonical_structure_of_dddd() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        let w: Vec<_> = std::iter::repeat_n(g.term("d").unwrap(), 4).collect();
        let yes = sug_membership(&g, &w, Budget::default()).unwrap();
        let (cs, m) = yes.witness().unwrap();
        let canon = canonical_fs(cs).unwrap();
        let canon = canon.model().unwrap();
        assert!(canon.isomorphic(m));
        let names = canonical_names(cs).unwrap();
        let root = &names[&TreeAddress::root()];
        assert_eq!(root.len(), cs.domain().height() + 1);
        assert!(root.iter().all(TreeAddress::is_root));
    }

    #[test]
    fn single_copy_rule_shares_one_class() {
        let g = parse_unification_grammar(
            "nonterminals S A\nterminals a\nattributes\nvalues\nstart S\nrule S -> A { up = dn }\nlex A -> a { }\n",
        )
        .unwrap();
        let yes = sug_membership(&g, &[g.term("a").unwrap()], Budget::default()).unwrap();
        let (cs, _) = yes.witness().unwrap();
        let m = canonical_fs(cs).unwrap();
        let m = m.model().unwrap();
        assert_eq!(m.name(&"1".parse().unwrap()), m.name(&TreeAddress::root()));
    }
}
