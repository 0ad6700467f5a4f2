//! Languages up to a length bound, word syntax, and language comparison
//! across the two formalisms.

mod exact;

use std::collections::BTreeSet;

use crate::budget::{Budget, SearchStats};
use crate::format::{parse_indexed_grammar, parse_unification_grammar, FormatError};
use crate::indexed::{indexed_language_upto, IndexedGrammar, IndexedProduction, Symbol};
use crate::symbol::{SymbolSet, Term};
use crate::unification::{classify_schema, sug_language_upto, ugi_check, UgiSchema, UnificationGrammar};
use crate::WordError;
use exact::{Item, Op, Patterns, StackGrammar, StackRule};

/// A grammar of either formalism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyGrammar {
    Indexed(IndexedGrammar),
    Unification(UnificationGrammar),
}

impl AnyGrammar {
    /// Parses `.ixg` or `.ugr` text according to the file extension.
    pub fn parse(text: &str, extension: &str) -> Result<AnyGrammar, FormatError> {
        match extension {
            "ixg" => parse_indexed_grammar(text).map(AnyGrammar::Indexed),
            "ugr" => parse_unification_grammar(text).map(AnyGrammar::Unification),
            other => Err(FormatError::new(
                0,
                format!("unknown grammar extension `.{other}`, expected `.ixg` or `.ugr`"),
            )),
        }
    }

    pub fn terminals(&self) -> &SymbolSet {
        match self {
            AnyGrammar::Indexed(g) => g.terminals(),
            AnyGrammar::Unification(g) => g.terminals(),
        }
    }
}

/// Reads a word: whitespace-separated terminal names, or, without
/// whitespace, the longest terminal names matching from left to right. `_`
/// and the empty string are the empty word.
pub fn parse_word(terminals: &SymbolSet, text: &str) -> Result<Vec<Term>, WordError> {
    let text = text.trim();
    if text.is_empty() || text == "_" {
        return Ok(Vec::new());
    }
    if text.contains(char::is_whitespace) {
        return text
            .split_whitespace()
            .map(|t| {
                terminals
                    .get(t)
                    .map(Term)
                    .ok_or_else(|| WordError::UnknownTerminal(t.to_string()))
            })
            .collect();
    }
    let mut out = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let best = terminals
            .names()
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(n.as_str()))
            .max_by_key(|(_, n)| n.len());
        match best {
            Some((i, n)) => {
                out.push(Term(i as u32));
                rest = &rest[n.len()..];
            }
            None if out.is_empty() && terminals.is_empty() => {
                return Err(WordError::UnknownTerminal(rest.to_string()))
            }
            None => return Err(WordError::Unsplittable(text.to_string())),
        }
    }
    Ok(out)
}

/// Writes a word with its terminal names: concatenated when every terminal
/// name is one character long, space-separated otherwise; `_` for ε.
pub fn format_word(terminals: &SymbolSet, w: &[Term]) -> String {
    if w.is_empty() {
        return "_".into();
    }
    let names: Vec<&str> = w.iter().map(|t| terminals.name(t.0)).collect();
    if terminals.names().iter().all(|n| n.chars().count() == 1) {
        names.concat()
    } else {
        names.join(" ")
    }
}

/// How a language was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Pattern fixpoint: every word up to the bound, no tree-size limit.
    Exact,
    /// Bounded tree search with the given coverage.
    Bounded(SearchStats),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub words: BTreeSet<Vec<Term>>,
    pub method: Method,
}

impl Language {
    /// True when no word up to the bound can be missing.
    pub fn is_complete(&self) -> bool {
        match self.method {
            Method::Exact => true,
            Method::Bounded(stats) => stats.is_exhaustive(),
        }
    }
}

fn lower_indexed(g: &IndexedGrammar) -> StackGrammar {
    let rules = g
        .productions()
        .iter()
        .map(|p| {
            let items = |rhs: &[Symbol], op: Op| {
                rhs.iter()
                    .map(|s| match s {
                        Symbol::T(t) => Item::T(*t),
                        Symbol::N(b) => Item::N(b.index(), op),
                    })
                    .collect()
            };
            match p {
                IndexedProduction::Push { lhs, rhs, index } => StackRule {
                    lhs: lhs.index(),
                    top: None,
                    items: vec![Item::N(rhs.index(), Op::Push(index.0))],
                },
                IndexedProduction::Pop { lhs, index, rhs } => StackRule {
                    lhs: lhs.index(),
                    top: Some(index.0),
                    items: items(rhs, Op::Pop),
                },
                IndexedProduction::Plain { lhs, rhs } => StackRule {
                    lhs: lhs.index(),
                    top: None,
                    items: items(rhs, Op::Copy),
                },
            }
        })
        .collect();
    StackGrammar {
        nonterminals: g.nonterminals().len(),
        terminals: g.terminals().len(),
        symbols: g.indices().len(),
        rules,
    }
}

/// Lowers a UGI grammar: a node's feature structure is a stack whose
/// `idx` is the top and whose `next` is the rest.
fn lower_ugi(g: &UnificationGrammar) -> Option<StackGrammar> {
    if !ugi_check(g).is_ugi {
        return None;
    }
    let mut rules = Vec::new();
    'rules: for p in g.productions() {
        let mut top = None;
        let mut items = Vec::new();
        for d in &p.daughters {
            let (shape, _) = classify_schema(&d.schema)?;
            let op = match shape {
                UgiSchema::Copy => Op::Copy,
                UgiSchema::Push(v) => Op::Push(v.0),
                UgiSchema::Pop(v) => {
                    // two pops demanding different tops never apply
                    if top.is_some_and(|t| t != v.0) {
                        continue 'rules;
                    }
                    top = Some(v.0);
                    Op::Pop
                }
            };
            items.push(Item::N(d.category.index(), op));
        }
        rules.push(StackRule {
            lhs: p.mother.index(),
            top,
            items,
        });
    }
    for l in g.lexicon() {
        rules.push(StackRule {
            lhs: l.mother.index(),
            top: None,
            items: l.word.map(Item::T).into_iter().collect(),
        });
    }
    Some(StackGrammar {
        nonterminals: g.nonterminals().len(),
        terminals: g.terminals().len(),
        symbols: g.values().len(),
        rules,
    })
}

/// Every word of length at most `maxlen` in `L(g)`, computed without a
/// bound on tree size. `None` when the intermediate sets exceed `cap`.
pub fn exact_indexed_language(g: &IndexedGrammar, maxlen: usize, cap: usize) -> Option<BTreeSet<Vec<Term>>> {
    let sg = lower_indexed(g);
    let p = Patterns::compute(&sg, maxlen, cap).ok()?;
    Some(p.words_from_empty(g.start().index()))
}

/// Every word of length at most `maxlen` generated by a UGI grammar. The
/// root's feature structure is unconstrained, so the stack at the root is
/// unknown. `None` for grammars that are not UGI or when the intermediate
/// sets exceed `cap`.
pub fn exact_ugi_language(g: &UnificationGrammar, maxlen: usize, cap: usize) -> Option<BTreeSet<Vec<Term>>> {
    let sg = lower_ugi(g)?;
    let p = Patterns::compute(&sg, maxlen, cap).ok()?;
    p.words_from_any(g.start().index(), cap).ok()
}

/// The words of length at most `maxlen`: exact when the grammar allows it,
/// otherwise by bounded search.
pub fn language_upto(g: &AnyGrammar, maxlen: usize, budget: Budget) -> Language {
    let cap = budget.max_trees;
    let exact = match g {
        AnyGrammar::Indexed(g) => exact_indexed_language(g, maxlen, cap),
        AnyGrammar::Unification(g) => exact_ugi_language(g, maxlen, cap),
    };
    if let Some(words) = exact {
        return Language {
            words,
            method: Method::Exact,
        };
    }
    let (words, stats) = match g {
        AnyGrammar::Indexed(g) => {
            let l = indexed_language_upto(g, maxlen, budget);
            (l.words, l.stats)
        }
        AnyGrammar::Unification(g) => {
            let l = sug_language_upto(g, maxlen, budget);
            (l.words, l.stats)
        }
    };
    Language {
        words,
        method: Method::Bounded(stats),
    }
}

/// Result of comparing two languages up to a length bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivVerdict {
    pub maxlen: usize,
    pub left_only: BTreeSet<String>,
    pub right_only: BTreeSet<String>,
    pub agree: bool,
    /// The left language came from a search that did not cover every tree.
    pub left_budget_exhausted: bool,
    pub right_budget_exhausted: bool,
    /// The common words.
    pub both: BTreeSet<String>,
}

/// Compares the languages of two grammars by terminal names.
pub fn equivalence(left: &AnyGrammar, right: &AnyGrammar, maxlen: usize, budget: Budget) -> EquivVerdict {
    let named = |g: &AnyGrammar, l: &Language| -> BTreeSet<Vec<String>> {
        l.words
            .iter()
            .map(|w| w.iter().map(|t| g.terminals().name(t.0).to_string()).collect())
            .collect()
    };
    let (ll, rl) = (language_upto(left, maxlen, budget), language_upto(right, maxlen, budget));
    let (lw, rw) = (named(left, &ll), named(right, &rl));
    // render with a table holding both alphabets so the words read the same
    let mut table = SymbolSet::new();
    for n in left.terminals().names().iter().chain(right.terminals().names()) {
        table.intern(n);
    }
    let show = |w: &Vec<String>| {
        let ids: Vec<Term> = w.iter().map(|n| Term(table.get(n).unwrap())).collect();
        format_word(&table, &ids)
    };
    let left_only: BTreeSet<String> = lw.difference(&rw).map(show).collect();
    let right_only: BTreeSet<String> = rw.difference(&lw).map(show).collect();
    let both: BTreeSet<String> = lw.intersection(&rw).map(show).collect();
    EquivVerdict {
        maxlen,
        agree: left_only.is_empty() && right_only.is_empty(),
        left_only,
        right_only,
        left_budget_exhausted: !ll.is_complete(),
        right_budget_exhausted: !rl.is_complete(),
        both,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::{AGREEMENT_UGR, ABC_IXG, DOUBLING_IXG, DOUBLING_U_UGR, WIDE_UGR};

    fn shown(g: &AnyGrammar, l: &Language) -> Vec<String> {
        l.words.iter().map(|w| format_word(g.terminals(), w)).collect()
    }

    #[test]
    fn exact_example_languages() {
        let g1 = AnyGrammar::parse(ABC_IXG, "ixg").unwrap();
        let l1 = language_upto(&g1, 9, Budget::default());
        assert_eq!(l1.method, Method::Exact);
        assert_eq!(shown(&g1, &l1), ["aaabbbccc", "aabbcc", "abc"]);

        let g2 = AnyGrammar::parse(DOUBLING_IXG, "ixg").unwrap();
        let u2 = AnyGrammar::parse(DOUBLING_U_UGR, "ugr").unwrap();
        for g in [&g2, &u2] {
            let l = language_upto(g, 8, Budget::default());
            assert_eq!(l.method, Method::Exact);
            assert_eq!(shown(g, &l), ["dd", "dddd", "dddddddd"]);
        }
    }

    #[test]
    fn exact_matches_bounded_search() {
        let cases = [(ABC_IXG, "ixg"), (DOUBLING_IXG, "ixg"), (DOUBLING_U_UGR, "ugr"), (WIDE_UGR, "ugr")];
        for (src, ext) in cases {
            let g = AnyGrammar::parse(src, ext).unwrap();
            let exact = language_upto(&g, 4, Budget::default());
            let bounded = match &g {
                AnyGrammar::Indexed(g) => indexed_language_upto(g, 4, Budget::new(256, 5_000_000)).words,
                AnyGrammar::Unification(g) => sug_language_upto(g, 4, Budget::new(256, 5_000_000)).words,
            };
            assert_eq!(exact.words, bounded, "{src}");
        }
    }

    #[test]
    fn non_ugi_grammar_uses_search() {
        let g = AnyGrammar::parse(AGREEMENT_UGR, "ugr").unwrap();
        let l = language_upto(&g, 3, Budget::default());
        assert!(matches!(l.method, Method::Bounded(_)));
        assert!(l.is_complete());
        assert_eq!(shown(&g, &l), ["dog barks", "dogs bark"]);
    }

    #[test]
    fn words_parse_both_ways() {
        let g = AnyGrammar::parse(AGREEMENT_UGR, "ugr").unwrap();
        let t = g.terminals();
        assert_eq!(parse_word(t, "dogs bark").unwrap(), parse_word(t, "dogsbark").unwrap());
        assert_eq!(parse_word(t, "dogbarks").unwrap().len(), 2);
        assert!(parse_word(t, "cat").is_err());
        assert_eq!(parse_word(t, "_").unwrap(), vec![]);
        assert_eq!(format_word(t, &[]), "_");
    }

    #[test]
    fn equivalence_of_examples() {
        let g1 = AnyGrammar::parse(ABC_IXG, "ixg").unwrap();
        let g2 = AnyGrammar::parse(DOUBLING_IXG, "ixg").unwrap();
        let u2 = AnyGrammar::parse(DOUBLING_U_UGR, "ugr").unwrap();
        let v = equivalence(&g2, &u2, 8, Budget::default());
        assert!(v.agree && !v.left_budget_exhausted && !v.right_budget_exhausted);
        let v = equivalence(&g1, &g2, 4, Budget::default());
        assert!(!v.agree);
        assert!(v.left_only.contains("abc"));
        assert!(v.right_only.contains("dd"));
        assert!(equivalence(&g1, &g1, 6, Budget::default()).agree);
    }
}
