//! Bounded search over c-structures.
//!
//! The search mirrors the one for derivation trees: leftmost expansion,
//! rules tried productions first and then lexicon rules, explicit frames with
//! undo. When consistency matters, the instantiated equations of each
//! expansion go into an incremental closure right away, so partial trees
//! whose equations already clash are abandoned. Attribute cycles are only
//! checked on complete trees.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{instantiate, CStructure, RuleRef, UCat, UnificationGrammar};
use crate::budget::{deepening_bounds, Budget, SearchStats, UNREACHABLE};
use crate::feature::{assert_equation, Closure, FeatureStructure, SolveResult};
use crate::indexed::Membership;
use crate::symbol::{Nt, Term};
use crate::tree::TreeAddress;
use crate::WordError;

struct Node {
    addr: TreeAddress,
    cat: UCat,
    rule: Option<RuleRef>,
}

struct Prepared {
    rules_by_lhs: Vec<Vec<RuleRef>>,
    min_nodes: Vec<usize>,
    min_yield: Vec<usize>,
}

impl Prepared {
    fn new(g: &UnificationGrammar) -> Self {
        let n = g.nonterminals().len();
        let rules_by_lhs = (0..n).map(|a| g.rules_for(Nt(a as u32)).collect()).collect();
        let mut min_nodes = vec![UNREACHABLE; n];
        let mut min_yield = vec![UNREACHABLE; n];
        for l in g.lexicon() {
            let a = l.mother.index();
            min_nodes[a] = 2;
            min_yield[a] = min_yield[a].min(usize::from(l.word.is_some()));
        }
        loop {
            let mut changed = false;
            for p in g.productions() {
                let (mut nodes, mut yld) = (1usize, 0usize);
                for d in &p.daughters {
                    nodes = nodes.saturating_add(min_nodes[d.category.index()]);
                    yld = yld.saturating_add(min_yield[d.category.index()]);
                }
                let a = p.mother.index();
                if nodes < min_nodes[a] {
                    min_nodes[a] = nodes;
                    changed = true;
                }
                if yld < min_yield[a] {
                    min_yield[a] = yld;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let clamp = |v: &mut Vec<usize>| v.iter_mut().for_each(|x| *x = (*x).min(UNREACHABLE));
        clamp(&mut min_nodes);
        clamp(&mut min_yield);
        Prepared {
            rules_by_lhs,
            min_nodes,
            min_yield,
        }
    }
}

#[derive(Clone, Copy)]
enum Goal<'a> {
    Word(&'a [Term]),
    MaxLen(usize),
}

impl Goal<'_> {
    fn max_len(&self) -> usize {
        match self {
            Goal::Word(w) => w.len(),
            Goal::MaxLen(n) => *n,
        }
    }
}

struct Saved {
    nodes_len: usize,
    base_len: usize,
    log_len: usize,
    emitted_len: usize,
    pend_yield: usize,
    pend_extra: usize,
    closure_mark: usize,
}

struct Frame {
    node: u32,
    cursor: usize,
    saved: Option<Saved>,
}

struct Search<'g> {
    g: &'g UnificationGrammar,
    prep: &'g Prepared,
    goal: Goal<'g>,
    bound: usize,
    exact: bool,
    consistent_only: bool,
    nodes: Vec<Node>,
    pending: Vec<u32>,
    popped: Vec<u32>,
    emitted: Vec<Term>,
    mismatch: bool,
    clash: bool,
    closure: Closure,
    pend_yield: usize,
    pend_extra: usize,
    steps: usize,
    max_steps: usize,
    truncated: bool,
    exhausted: bool,
}

impl<'g> Search<'g> {
    fn new(
        g: &'g UnificationGrammar,
        prep: &'g Prepared,
        goal: Goal<'g>,
        bound: usize,
        max_steps: usize,
    ) -> Self {
        Search {
            g,
            prep,
            goal,
            bound,
            exact: false,
            consistent_only: true,
            nodes: Vec::new(),
            pending: Vec::new(),
            popped: Vec::new(),
            emitted: Vec::new(),
            mismatch: false,
            clash: false,
            closure: Closure::new(),
            pend_yield: 0,
            pend_extra: 0,
            steps: 0,
            max_steps,
            truncated: false,
            exhausted: false,
        }
    }

    fn nt_of(&self, node: u32) -> Nt {
        match self.nodes[node as usize].cat {
            UCat::N(a) => a,
            UCat::Leaf(_) => unreachable!("only nonterminals are expanded"),
        }
    }

    fn add_node(&mut self, addr: TreeAddress, cat: UCat) -> u32 {
        match cat {
            UCat::N(b) => {
                self.pend_yield += self.prep.min_yield[b.index()];
                self.pend_extra += self.prep.min_nodes[b.index()] - 1;
            }
            UCat::Leaf(Some(_)) => self.pend_yield += 1,
            UCat::Leaf(None) => {}
        }
        self.nodes.push(Node {
            addr,
            cat,
            rule: None,
        });
        (self.nodes.len() - 1) as u32
    }

    fn attach(&mut self, node: u32, k: usize, cat: UCat, schema: &super::Schema) {
        let mother = self.nodes[node as usize].addr.clone();
        let addr = mother.child(k as u32 + 1);
        if self.consistent_only && !self.clash {
            for e in instantiate(schema, &mother, &addr) {
                if assert_equation(&mut self.closure, &e).is_err() {
                    self.clash = true;
                    break;
                }
            }
        }
        self.add_node(addr, cat);
    }

    fn apply(&mut self, node: u32, rule: RuleRef) -> Saved {
        let saved = Saved {
            nodes_len: self.nodes.len(),
            base_len: self.pending.len() - 1,
            log_len: self.popped.len(),
            emitted_len: self.emitted.len(),
            pend_yield: self.pend_yield,
            pend_extra: self.pend_extra,
            closure_mark: self.closure.mark(),
        };
        let top = self.pending.pop();
        debug_assert_eq!(top, Some(node));
        let a = self.nt_of(node);
        self.pend_yield -= self.prep.min_yield[a.index()];
        self.pend_extra -= self.prep.min_nodes[a.index()] - 1;
        self.nodes[node as usize].rule = Some(rule);

        let g = self.g;
        let first_child = self.nodes.len() as u32;
        match rule {
            RuleRef::Production(i) => {
                for (k, d) in g.productions()[i].daughters.iter().enumerate() {
                    self.attach(node, k, UCat::N(d.category), &d.schema);
                }
            }
            RuleRef::Lexicon(i) => {
                let l = &g.lexicon()[i];
                self.attach(node, 0, UCat::Leaf(l.word), &l.schema);
            }
        }
        let last_child = self.nodes.len() as u32;
        self.pending.extend((first_child..last_child).rev());

        while let Some(&top) = self.pending.last() {
            let UCat::Leaf(t) = self.nodes[top as usize].cat else {
                break;
            };
            self.pending.pop();
            self.popped.push(top);
            if let Some(t) = t {
                self.pend_yield -= 1;
                self.emitted.push(t);
                if let Goal::Word(w) = self.goal {
                    let k = self.emitted.len() - 1;
                    if k >= w.len() || w[k] != t {
                        self.mismatch = true;
                    }
                }
            }
        }
        saved
    }

    fn undo(&mut self, node: u32, saved: Saved) {
        while self.popped.len() > saved.log_len {
            let leaf = self.popped.pop().unwrap();
            self.pending.push(leaf);
        }
        self.pending.truncate(saved.base_len);
        self.pending.push(node);
        self.nodes.truncate(saved.nodes_len);
        self.nodes[node as usize].rule = None;
        self.emitted.truncate(saved.emitted_len);
        self.pend_yield = saved.pend_yield;
        self.pend_extra = saved.pend_extra;
        self.closure.undo_to(saved.closure_mark);
        self.mismatch = false;
        self.clash = false;
    }

    fn pruned(&mut self) -> bool {
        if self.mismatch || self.clash || self.emitted.len() + self.pend_yield > self.goal.max_len() {
            return true;
        }
        if self.nodes.len() + self.pend_extra > self.bound {
            self.truncated = true;
            return true;
        }
        false
    }

    fn run(&mut self, on_complete: &mut dyn FnMut(&Search<'g>) -> bool) {
        self.add_node(TreeAddress::root(), UCat::N(self.g.start()));
        self.pending.push(0);
        if self.pend_yield > self.goal.max_len() {
            return;
        }
        if self.nodes.len() + self.pend_extra > self.bound {
            self.truncated = true;
            return;
        }
        let mut frames = vec![Frame {
            node: 0,
            cursor: 0,
            saved: None,
        }];
        while let Some(frame) = frames.last_mut() {
            let node = frame.node;
            if let Some(saved) = frame.saved.take() {
                self.undo(node, saved);
            }
            let rules = &self.prep.rules_by_lhs[self.nt_of(node).index()];
            let mut advanced = false;
            while frame.cursor < rules.len() {
                let rule = rules[frame.cursor];
                frame.cursor += 1;
                self.steps += 1;
                if self.steps > self.max_steps {
                    self.exhausted = true;
                    return;
                }
                let saved = self.apply(node, rule);
                if self.pruned() {
                    self.undo(node, saved);
                    continue;
                }
                frame.saved = Some(saved);
                advanced = true;
                break;
            }
            if !advanced {
                frames.pop();
                continue;
            }
            if let Some(&next) = self.pending.last() {
                frames.push(Frame {
                    node: next,
                    cursor: 0,
                    saved: None,
                });
            } else {
                let complete = match self.goal {
                    Goal::Word(w) => self.emitted.len() == w.len(),
                    Goal::MaxLen(_) => true,
                };
                let size_ok = !self.exact || self.nodes.len() == self.bound;
                let acyclic = !self.consistent_only || self.closure.cycle().is_none();
                if complete && size_ok && acyclic && !on_complete(self) {
                    return;
                }
            }
        }
    }

    fn cstructure(&self) -> CStructure {
        let cats: BTreeMap<TreeAddress, UCat> =
            self.nodes.iter().map(|n| (n.addr.clone(), n.cat)).collect();
        let rules: BTreeMap<TreeAddress, RuleRef> = self
            .nodes
            .iter()
            .filter_map(|n| n.rule.map(|r| (n.addr.clone(), r)))
            .collect();
        CStructure::new(self.g, cats, rules).expect("search builds valid c-structures")
    }
}

pub(crate) fn check_word(g: &UnificationGrammar, w: &[Term]) -> Result<(), WordError> {
    match w.iter().find(|t| t.index() >= g.terminals().len()) {
        Some(t) => Err(WordError::UnknownTerminal(format!("#{}", t.0))),
        None => Ok(()),
    }
}

/// Searches for a c-structure with terminal string `w` that generates a
/// well-defined feature structure. The witness is a smallest such
/// c-structure together with its least model.
pub fn sug_membership(
    g: &UnificationGrammar,
    w: &[Term],
    budget: Budget,
) -> Result<Membership<(CStructure, FeatureStructure)>, WordError> {
    check_word(g, w)?;
    let prep = Prepared::new(g);
    let mut stats = SearchStats::default();
    for bound in deepening_bounds(budget.max_nodes) {
        let remaining = budget.max_trees.saturating_sub(stats.steps);
        let mut search = Search::new(g, &prep, Goal::Word(w), bound, remaining);
        let mut best: Option<(usize, CStructure)> = None;
        search.run(&mut |s| {
            if best.as_ref().is_none_or(|(n, _)| s.nodes.len() < *n) {
                best = Some((s.nodes.len(), s.cstructure()));
            }
            true
        });
        stats.steps += search.steps;
        if let Some((_, cs)) = best {
            let SolveResult::Consistent(m) = cs.generates_check() else {
                unreachable!("the search only keeps consistent c-structures")
            };
            return Ok(Membership::Yes((cs, m)));
        }
        if search.exhausted {
            stats.exhausted = true;
            return Ok(Membership::NoWithinBudget(stats));
        }
        stats.complete_nodes = bound;
        stats.truncated = search.truncated;
        if !search.truncated {
            break;
        }
    }
    Ok(Membership::NoWithinBudget(stats))
}

/// Strings of bounded length found by a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SugLanguage {
    pub words: BTreeSet<Vec<Term>>,
    pub stats: SearchStats,
}

/// All terminal strings of length at most `maxlen` generated by some
/// c-structure inside the budget. One search covers all lengths at once.
pub fn sug_language_upto(g: &UnificationGrammar, maxlen: usize, budget: Budget) -> SugLanguage {
    let prep = Prepared::new(g);
    let mut stats = SearchStats::default();
    let mut words = BTreeSet::new();
    for bound in deepening_bounds(budget.max_nodes) {
        let remaining = budget.max_trees.saturating_sub(stats.steps);
        let mut search = Search::new(g, &prep, Goal::MaxLen(maxlen), bound, remaining);
        search.run(&mut |s| {
            words.insert(s.emitted.clone());
            true
        });
        stats.steps += search.steps;
        if search.exhausted {
            stats.exhausted = true;
            break;
        }
        stats.complete_nodes = bound;
        stats.truncated = search.truncated;
        if !search.truncated {
            break;
        }
    }
    SugLanguage { words, stats }
}

/// Stream of all c-structures with a given terminal string, consistent or
/// not, in ascending size and within one size in the order the rules were
/// applied.
pub struct CStructureEnumerator<'g> {
    g: &'g UnificationGrammar,
    prep: Prepared,
    word: Vec<Term>,
    budget: Budget,
    level: usize,
    buffer: VecDeque<CStructure>,
    steps: usize,
    done: bool,
    exhausted: bool,
}

impl CStructureEnumerator<'_> {
    /// True once the `max_trees` budget cut the stream short.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    fn fill(&mut self) {
        while self.buffer.is_empty() && !self.done {
            if self.level > self.budget.max_nodes {
                self.done = true;
                break;
            }
            let remaining = self.budget.max_trees.saturating_sub(self.steps);
            let mut search = Search::new(self.g, &self.prep, Goal::Word(&self.word), self.level, remaining);
            search.exact = true;
            search.consistent_only = false;
            let buffer = &mut self.buffer;
            search.run(&mut |s| {
                buffer.push_back(s.cstructure());
                true
            });
            self.steps += search.steps;
            if search.exhausted {
                self.exhausted = true;
                self.done = true;
            } else if !search.truncated {
                self.done = true;
            }
            self.level += 1;
        }
    }
}

impl Iterator for CStructureEnumerator<'_> {
    type Item = CStructure;

    fn next(&mut self) -> Option<CStructure> {
        self.fill();
        self.buffer.pop_front()
    }
}

pub fn enumerate_cstructures<'g>(
    g: &'g UnificationGrammar,
    word: &[Term],
    budget: Budget,
) -> Result<CStructureEnumerator<'g>, WordError> {
    check_word(g, word)?;
    let prep = Prepared::new(g);
    let min = prep.min_nodes[g.start().index()];
    Ok(CStructureEnumerator {
        g,
        word: word.to_vec(),
        budget,
        level: min.clamp(2, UNREACHABLE),
        buffer: VecDeque::new(),
        steps: 0,
        done: min >= UNREACHABLE || budget.max_nodes < 2,
        exhausted: false,
        prep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_unification_grammar;
    use crate::testdata::{AGREEMENT_UGR, DOUBLING_U_UGR};

    fn word(g: &UnificationGrammar, s: &str) -> Vec<Term> {
        s.split_whitespace().map(|t| g.term(t).unwrap()).collect()
    }

    #[test]
    fn single_lexicon_rule() {
        let g = parse_unification_grammar(
            "nonterminals S\nterminals a\nattributes\nvalues\nstart S\nlex S -> a { }\n",
        )
        .unwrap();
        let all: Vec<_> = enumerate_cstructures(&g, &[Term(0)], Budget::default()).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].len(), 2);
        assert!(enumerate_cstructures(&g, &[Term(3)], Budget::default()).is_err());
    }

    #[test]
    fn doubling_membership() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        let yes = sug_membership(&g, &word(&g, "d d d d"), Budget::default()).unwrap();
        let (cs, m) = yes.witness().unwrap();
        assert_eq!(cs.len(), 20);
        assert!(m.well_defined_check().is_well_defined());
        let no = sug_membership(&g, &word(&g, "d d d"), Budget::default()).unwrap();
        assert!(!no.is_yes());
        let l = sug_language_upto(&g, 8, Budget::new(512, 2_000_000));
        let lens: BTreeSet<usize> = l.words.iter().map(Vec::len).collect();
        assert_eq!(lens, BTreeSet::from([2, 4, 8]));
    }

    #[test]
    fn enumeration_includes_inconsistent_structures() {
        let g = parse_unification_grammar(DOUBLING_U_UGR).unwrap();
        let w = word(&g, "d d d");
        let all: Vec<_> = enumerate_cstructures(&g, &w, Budget::new(24, 1_000_000)).unwrap().collect();
        assert!(!all.is_empty());
        assert!(all.iter().all(|cs| !cs.generates_check().is_consistent()));
        assert!(all.iter().all(|cs| cs.terminal_string() == w));
    }

    #[test]
    fn agreement_grammar() {
        let g = parse_unification_grammar(AGREEMENT_UGR).unwrap();
        let l = sug_language_upto(&g, 2, Budget::default());
        let got: BTreeSet<Vec<Term>> = ["dog barks", "dogs bark"].iter().map(|s| word(&g, s)).collect();
        assert_eq!(l.words, got);
        assert!(l.stats.is_exhaustive());
        assert!(!sug_membership(&g, &word(&g, "dog bark"), Budget::default()).unwrap().is_yes());
    }
}
