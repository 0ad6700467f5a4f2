//! Translations between reduced indexed grammars with a marked index-end and
//! UGI grammars on reduced form with a sink-mapped root, and between their
//! derivation trees and c-structures.
//!
//! An index stack `f₁ … fₖ` is represented by a chain of feature-structure
//! nodes: `idx` leads to the value `f₁` and `next` to the rest of the chain.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::feature::{FeatureStructure, NodeId};
use crate::indexed::{DerivationTree, IndexedGrammar, IndexedProduction, IxLabel, Symbol};
use crate::symbol::{Attr, Ix, SymbolSet, Value};
use crate::tree::TreeAddress;
use crate::unification::{
    copy_schema, pop_schema, push_schema, ugi_check, CStructure, Daughter, LexRule, RuleRef, Schema,
    UCat, UProduction, UgiAttrs, UgiSchema, UnificationGrammar,
};
use crate::unification::classify_schema;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("the c-structure's equations are not satisfied by the feature structure")]
    ModelMismatch,
    #[error("the rebuilt tree is invalid: {0}")]
    InvalidResult(String),
}

/// One-to-one map between the productions of an indexed grammar and the
/// production and lexicon rules of its unification counterpart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCorrespondence {
    /// `(indexed production, unification rule)` in indexed-production order.
    pub pairs: Vec<(usize, RuleRef)>,
}

impl RuleCorrespondence {
    pub fn to_unification(&self, i: usize) -> Option<RuleRef> {
        self.pairs.iter().find(|(j, _)| *j == i).map(|(_, r)| *r)
    }

    pub fn to_indexed(&self, r: RuleRef) -> Option<usize> {
        self.pairs.iter().find(|(_, s)| *s == r).map(|(i, _)| *i)
    }

    /// One line per pair, `A ^f -> B  <=>  rule A -> B { ... }`, for
    /// comment blocks next to a written grammar.
    pub fn describe(&self, ig: &IndexedGrammar, ug: &UnificationGrammar) -> Vec<String> {
        self.pairs
            .iter()
            .map(|(i, r)| {
                format!(
                    "{}  <=>  {}",
                    ig.display_production(&ig.productions()[*i]),
                    ug.display_rule(*r)
                )
            })
            .collect()
    }

    /// Reads pairs back from lines written by [`RuleCorrespondence::describe`]
    /// (with or without a leading `# `). Returns `None` unless every rule
    /// of both grammars is matched exactly once.
    pub fn from_lines<'a>(
        lines: impl IntoIterator<Item = &'a str>,
        ig: &IndexedGrammar,
        ug: &UnificationGrammar,
    ) -> Option<Self> {
        let ix: BTreeMap<String, usize> = ig
            .productions()
            .iter()
            .enumerate()
            .map(|(i, p)| (ig.display_production(p), i))
            .collect();
        let rules = (0..ug.productions().len())
            .map(RuleRef::Production)
            .chain((0..ug.lexicon().len()).map(RuleRef::Lexicon));
        let un: BTreeMap<String, RuleRef> = rules.map(|r| (ug.display_rule(r), r)).collect();
        let mut pairs = Vec::new();
        for line in lines {
            let line = line.trim_start_matches('#').trim();
            let Some((l, r)) = line.split_once("<=>") else { continue };
            pairs.push((*ix.get(l.trim())?, *un.get(r.trim())?));
        }
        pairs.sort();
        let total = ug.productions().len() + ug.lexicon().len();
        let distinct_left = pairs.windows(2).all(|w| w[0].0 != w[1].0);
        let mut rights: Vec<RuleRef> = pairs.iter().map(|p| p.1).collect();
        rights.sort();
        rights.dedup();
        (pairs.len() == ig.productions().len() && pairs.len() == total && distinct_left && rights.len() == total)
            .then_some(RuleCorrespondence { pairs })
    }
}

fn stack_attrs() -> (SymbolSet, UgiAttrs) {
    let mut attributes = SymbolSet::new();
    let next = Attr(attributes.intern("next"));
    let idx = Attr(attributes.intern("idx"));
    (attributes, UgiAttrs { next, idx })
}

fn require_reduced_marked(g: &IndexedGrammar) -> Result<(), TransformError> {
    let report = g.reduced_form_check();
    if let Some(o) = report.offenders.first() {
        return Err(TransformError::Precondition(format!(
            "not on reduced form: rule {} `{}`: {}",
            o.rule + 1,
            g.display_production(&g.productions()[o.rule]),
            o.reason
        )));
    }
    if !g.marked_index_end_check() {
        return Err(TransformError::Precondition(format!(
            "no marked index-end: the start symbol `{}` must occur in exactly one rule, \
             `{} -> A ^$`, whose index occurs in no other rule",
            g.nt_name(g.start()),
            g.nt_name(g.start())
        )));
    }
    Ok(())
}

/// Translates a reduced indexed grammar with a marked index-end into a
/// simple unification grammar: pushes and pops become `next`/`idx` schemata,
/// binary rules copy the mother into both daughters, and terminal rules
/// become lexicon rules.
pub fn u_transform(g: &IndexedGrammar) -> Result<(UnificationGrammar, RuleCorrespondence), TransformError> {
    require_reduced_marked(g)?;
    let (attributes, UgiAttrs { next, idx }) = stack_attrs();
    let values = g.indices().clone();
    let value = |i: Ix| Value(i.0);
    let mut productions = Vec::new();
    let mut lexicon = Vec::new();
    let mut pairs = Vec::new();
    for (i, p) in g.productions().iter().enumerate() {
        let unary = |mother, category, schema| UProduction {
            mother,
            daughters: vec![Daughter { category, schema }],
        };
        let rule = match p {
            IndexedProduction::Push { lhs, rhs, index } => {
                productions.push(unary(*lhs, *rhs, push_schema(next, idx, value(*index))));
                RuleRef::Production(productions.len() - 1)
            }
            IndexedProduction::Pop { lhs, index, rhs } => {
                let [Symbol::N(b)] = rhs[..] else {
                    unreachable!("reduced form checked")
                };
                productions.push(unary(*lhs, b, pop_schema(next, idx, value(*index))));
                RuleRef::Production(productions.len() - 1)
            }
            IndexedProduction::Plain { lhs, rhs } => match rhs[..] {
                [Symbol::N(b), Symbol::N(c)] => {
                    productions.push(UProduction {
                        mother: *lhs,
                        daughters: vec![
                            Daughter {
                                category: b,
                                schema: copy_schema(),
                            },
                            Daughter {
                                category: c,
                                schema: copy_schema(),
                            },
                        ],
                    });
                    RuleRef::Production(productions.len() - 1)
                }
                [Symbol::T(t)] | [Symbol::T(t), ..] => {
                    lexicon.push(LexRule {
                        mother: *lhs,
                        word: Some(t),
                        schema: Schema::new(),
                    });
                    RuleRef::Lexicon(lexicon.len() - 1)
                }
                [] => {
                    lexicon.push(LexRule {
                        mother: *lhs,
                        word: None,
                        schema: Schema::new(),
                    });
                    RuleRef::Lexicon(lexicon.len() - 1)
                }
                _ => unreachable!("reduced form checked"),
            },
        };
        pairs.push((i, rule));
    }
    let out = UnificationGrammar::new(
        g.nonterminals().clone(),
        g.terminals().clone(),
        attributes,
        values,
        productions,
        lexicon,
        g.start(),
    )
    .map_err(|e| TransformError::Precondition(e.to_string()))?;
    Ok((out, RuleCorrespondence { pairs }))
}

/// Inverts [`u_transform`] on UGI grammars on reduced form with a
/// sink-mapped root. The indices are the value symbols that occur in rules.
pub fn reverse_u(g: &UnificationGrammar) -> Result<(IndexedGrammar, RuleCorrespondence), TransformError> {
    let report = ugi_check(g);
    if !(report.is_ugi && report.is_reduced && report.has_sink_mapped_root) {
        let o = &report.offenders[0];
        let at = o.rule.map(|r| format!("{r} `{}`: ", g.display_rule(r))).unwrap_or_default();
        return Err(TransformError::Precondition(format!("{}: {at}{}", o.property, o.reason)));
    }
    let shapes: Vec<Vec<UgiSchema>> = g
        .productions()
        .iter()
        .map(|p| p.daughters.iter().map(|d| classify_schema(&d.schema).unwrap().0).collect())
        .collect();
    let mut used: Vec<Value> = shapes
        .iter()
        .flatten()
        .filter_map(|s| match s {
            UgiSchema::Push(v) | UgiSchema::Pop(v) => Some(*v),
            UgiSchema::Copy => None,
        })
        .collect();
    used.sort();
    used.dedup();
    let mut indices = SymbolSet::new();
    let ix_of: BTreeMap<Value, Ix> = used
        .iter()
        .map(|v| (*v, Ix(indices.intern(g.value_name(*v)))))
        .collect();

    let mut productions = Vec::new();
    let mut pairs = Vec::new();
    for (i, (p, ds)) in g.productions().iter().zip(&shapes).enumerate() {
        let rule = match ds[..] {
            [UgiSchema::Push(v)] => IndexedProduction::Push {
                lhs: p.mother,
                rhs: p.daughters[0].category,
                index: ix_of[&v],
            },
            [UgiSchema::Pop(v)] => IndexedProduction::Pop {
                lhs: p.mother,
                index: ix_of[&v],
                rhs: vec![Symbol::N(p.daughters[0].category)],
            },
            _ => IndexedProduction::Plain {
                lhs: p.mother,
                rhs: p.daughters.iter().map(|d| Symbol::N(d.category)).collect(),
            },
        };
        productions.push(rule);
        pairs.push((productions.len() - 1, RuleRef::Production(i)));
    }
    for (i, l) in g.lexicon().iter().enumerate() {
        productions.push(IndexedProduction::Plain {
            lhs: l.mother,
            rhs: l.word.map(Symbol::T).into_iter().collect(),
        });
        pairs.push((productions.len() - 1, RuleRef::Lexicon(i)));
    }
    let out = IndexedGrammar::new(
        g.nonterminals().clone(),
        g.terminals().clone(),
        indices,
        productions,
        g.start(),
    )
    .map_err(|e| TransformError::Precondition(e.to_string()))?;
    Ok((out, RuleCorrespondence { pairs }))
}

/// The c-structure over the same tree domain as a derivation tree of `g`,
/// together with the structure of its index strings: one node per suffix
/// of a stack in the tree and one per index, `idx` leading from `fγ` to `f`
/// and `next` from `fγ` to `γ`. Each nonterminal node is named by its
/// stack; leaves get nodes of their own.
pub fn cstructure_from_derivation(
    g: &IndexedGrammar,
    t: &DerivationTree,
) -> Result<(CStructure, FeatureStructure), TransformError> {
    let (ug, corr) = u_transform(g)?;
    let license = t
        .validate(g)
        .map_err(|e| TransformError::Precondition(e.to_string()))?;
    let mut cats = BTreeMap::new();
    for (x, label) in t.labels() {
        let cat = match label {
            IxLabel::Node { symbol, .. } => UCat::N(*symbol),
            IxLabel::Leaf(w) => UCat::Leaf(*w),
        };
        cats.insert(x.clone(), cat);
    }
    let rules: BTreeMap<TreeAddress, RuleRef> = license
        .iter()
        .map(|(x, i)| (x.clone(), corr.to_unification(*i).expect("correspondence is total")))
        .collect();
    let cs = CStructure::new(&ug, cats, rules).map_err(|e| TransformError::InvalidResult(e.to_string()))?;

    let next = ug.attr("next").unwrap();
    let idx = ug.attr("idx").unwrap();
    let mut fs = FeatureStructure::new();
    let mut stacks: BTreeMap<Vec<Ix>, NodeId> = BTreeMap::new();
    let mut values: BTreeMap<Ix, NodeId> = BTreeMap::new();
    for (x, label) in t.labels() {
        let q = match label {
            IxLabel::Node { stack, .. } => stack_node(&mut fs, &mut stacks, &mut values, stack, next, idx),
            IxLabel::Leaf(_) => fs.add_node(),
        };
        fs.set_name(x.clone(), q);
    }
    Ok((cs, fs))
}

fn stack_node(
    fs: &mut FeatureStructure,
    stacks: &mut BTreeMap<Vec<Ix>, NodeId>,
    values: &mut BTreeMap<Ix, NodeId>,
    stack: &[Ix],
    next: Attr,
    idx: Attr,
) -> NodeId {
    if let Some(&q) = stacks.get(stack) {
        return q;
    }
    let q = fs.add_node();
    stacks.insert(stack.to_vec(), q);
    if let Some((&f, rest)) = stack.split_first() {
        let v = *values.entry(f).or_insert_with(|| {
            let v = fs.add_node();
            fs.set_value(v, Value(f.0));
            v
        });
        fs.set_edge(q, idx, v);
        let r = stack_node(fs, stacks, values, rest, next, idx);
        fs.set_edge(q, next, r);
    }
    q
}

/// The value string a node spells: its value if atomic, else the string of
/// its `idx` node followed by the string of its `next` node when both
/// exist, else ε.
pub fn idx_lst(m: &FeatureStructure, q: NodeId, attrs: UgiAttrs) -> Vec<Value> {
    let mut out = Vec::new();
    let mut cur = q;
    loop {
        if let Some(v) = m.alpha(cur) {
            out.push(v);
            break;
        }
        match (m.delta(cur, attrs.idx), m.delta(cur, attrs.next)) {
            (Some(i), Some(n)) => {
                out.extend(idx_lst(m, i, attrs));
                cur = n;
            }
            _ => break,
        }
    }
    out
}

/// The shortest prefix of [`idx_lst`] ending in `dollar`, or ε if `dollar`
/// does not occur.
pub fn idx_lst_dollar(m: &FeatureStructure, q: NodeId, attrs: UgiAttrs, dollar: Value) -> Vec<Value> {
    let mut s = idx_lst(m, q, attrs);
    match s.iter().position(|v| *v == dollar) {
        Some(p) => {
            s.truncate(p + 1);
            s
        }
        None => Vec::new(),
    }
}

/// Rebuilds the derivation tree of `g` from a c-structure of `U(g)` and a
/// feature structure it generates: categories carry over and each
/// nonterminal node gets the index string spelled by its feature-structure
/// node up to the first `$`. The root's index string is ε.
pub fn derivation_from_cstructure(
    g: &IndexedGrammar,
    cs: &CStructure,
    m: &FeatureStructure,
) -> Result<DerivationTree, TransformError> {
    let (ug, _) = u_transform(g)?;
    let (_, dollar) = g.marked_index_end().expect("checked by u_transform");
    let satisfied = m
        .satisfies_set(&cs.collect_equations())
        .map_err(|_| TransformError::ModelMismatch)?;
    if !satisfied {
        return Err(TransformError::ModelMismatch);
    }
    let attrs = UgiAttrs {
        next: ug.attr("next").unwrap(),
        idx: ug.attr("idx").unwrap(),
    };
    let mut labels = BTreeMap::new();
    for (x, cat) in cs.categories() {
        let label = match cat {
            UCat::N(a) => {
                let stack = if x.is_root() {
                    Vec::new()
                } else {
                    let q = m.name(x).ok_or(TransformError::ModelMismatch)?;
                    idx_lst_dollar(m, q, attrs, Value(dollar.0))
                        .into_iter()
                        .map(|v| Ix(v.0))
                        .collect()
                };
                IxLabel::Node { symbol: *a, stack }
            }
            UCat::Leaf(w) => IxLabel::Leaf(*w),
        };
        labels.insert(x.clone(), label);
    }
    let t = DerivationTree::new(labels).map_err(|e| TransformError::InvalidResult(e.to_string()))?;
    t.validate(g).map_err(|e| TransformError::InvalidResult(e.to_string()))?;
    Ok(t)
}
