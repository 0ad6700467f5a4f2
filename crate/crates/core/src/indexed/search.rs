//! Bounded search over derivation trees.
//!
//! Trees are built by leftmost derivation: the pending nonterminal that comes
//! first in `≺` order is always expanded next, trying productions in grammar
//! order. Every search is iterative (an explicit frame stack with undo), so
//! tree size is limited by the budget and not by the call stack.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use super::{DerivationTree, IndexedGrammar, IndexedProduction, IxLabel, Symbol};
use crate::budget::{deepening_bounds, Budget, SearchStats, UNREACHABLE};
use crate::symbol::{Ix, Nt, Term};
use crate::tree::TreeAddress;
use crate::WordError;

#[derive(Clone, Default)]
struct Stack(Option<Rc<Cell>>);

struct Cell {
    top: Ix,
    rest: Stack,
}

impl Stack {
    fn push(&self, top: Ix) -> Stack {
        Stack(Some(Rc::new(Cell {
            top,
            rest: self.clone(),
        })))
    }

    fn top(&self) -> Option<Ix> {
        self.0.as_ref().map(|c| c.top)
    }

    fn rest(&self) -> Stack {
        self.0.as_ref().map(|c| c.rest.clone()).unwrap_or_default()
    }

    fn to_vec(&self) -> Vec<Ix> {
        let mut out = Vec::new();
        let mut cur = self.0.as_ref();
        while let Some(c) = cur {
            out.push(c.top);
            cur = c.rest.0.as_ref();
        }
        out
    }
}

enum Label {
    N(Nt, Stack),
    Leaf(Option<Term>),
}

struct Node {
    parent: u32,
    child_no: u32,
    label: Label,
}

/// Lower bounds from the context-free skeleton (stacks ignored).
struct Prepared {
    rules_by_lhs: Vec<Vec<usize>>,
    min_nodes: Vec<usize>,
    min_yield: Vec<usize>,
}

impl Prepared {
    fn new(g: &IndexedGrammar) -> Self {
        let n = g.nonterminals().len();
        let mut rules_by_lhs = vec![Vec::new(); n];
        for (i, p) in g.productions().iter().enumerate() {
            rules_by_lhs[p.lhs().index()].push(i);
        }
        let mut min_nodes = vec![UNREACHABLE; n];
        let mut min_yield = vec![UNREACHABLE; n];
        loop {
            let mut changed = false;
            for p in g.productions() {
                let ds = p.daughters();
                let (mut nodes, mut yld) = (1usize, 0usize);
                if ds.is_empty() {
                    nodes += 1;
                }
                for d in &ds {
                    match d {
                        Symbol::T(_) => {
                            nodes += 1;
                            yld += 1;
                        }
                        Symbol::N(b) => {
                            nodes = nodes.saturating_add(min_nodes[b.index()]);
                            yld = yld.saturating_add(min_yield[b.index()]);
                        }
                    }
                }
                let a = p.lhs().index();
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
}

struct Frame {
    node: u32,
    cursor: usize,
    saved: Option<Saved>,
}

struct Search<'g> {
    g: &'g IndexedGrammar,
    prep: &'g Prepared,
    goal: Goal<'g>,
    bound: usize,
    exact: bool,
    nodes: Vec<Node>,
    pending: Vec<u32>,
    popped: Vec<u32>,
    emitted: Vec<Term>,
    mismatch: bool,
    pend_yield: usize,
    pend_extra: usize,
    steps: usize,
    max_steps: usize,
    truncated: bool,
    exhausted: bool,
}

const NO_PARENT: u32 = u32::MAX;

impl<'g> Search<'g> {
    fn new(
        g: &'g IndexedGrammar,
        prep: &'g Prepared,
        goal: Goal<'g>,
        bound: usize,
        exact: bool,
        max_steps: usize,
    ) -> Self {
        Search {
            g,
            prep,
            goal,
            bound,
            exact,
            nodes: Vec::new(),
            pending: Vec::new(),
            popped: Vec::new(),
            emitted: Vec::new(),
            mismatch: false,
            pend_yield: 0,
            pend_extra: 0,
            steps: 0,
            max_steps,
            truncated: false,
            exhausted: false,
        }
    }

    fn nt_of(&self, node: u32) -> Nt {
        match &self.nodes[node as usize].label {
            Label::N(a, _) => *a,
            Label::Leaf(_) => unreachable!("only nonterminals are expanded"),
        }
    }

    fn applicable(&self, node: u32, rule: usize) -> bool {
        match &self.g.productions()[rule] {
            IndexedProduction::Pop { index, .. } => match &self.nodes[node as usize].label {
                Label::N(_, stack) => stack.top() == Some(*index),
                Label::Leaf(_) => false,
            },
            _ => true,
        }
    }

    fn add_node(&mut self, parent: u32, child_no: u32, label: Label) -> u32 {
        match &label {
            Label::N(b, _) => {
                self.pend_yield += self.prep.min_yield[b.index()];
                self.pend_extra += self.prep.min_nodes[b.index()] - 1;
            }
            Label::Leaf(Some(_)) => self.pend_yield += 1,
            Label::Leaf(None) => {}
        }
        self.nodes.push(Node {
            parent,
            child_no,
            label,
        });
        (self.nodes.len() - 1) as u32
    }

    fn apply(&mut self, node: u32, rule: usize) -> Saved {
        let saved = Saved {
            nodes_len: self.nodes.len(),
            base_len: self.pending.len() - 1,
            log_len: self.popped.len(),
            emitted_len: self.emitted.len(),
            pend_yield: self.pend_yield,
            pend_extra: self.pend_extra,
        };
        let top = self.pending.pop();
        debug_assert_eq!(top, Some(node));
        let (a, stack) = match &self.nodes[node as usize].label {
            Label::N(a, s) => (*a, s.clone()),
            Label::Leaf(_) => unreachable!(),
        };
        self.pend_yield -= self.prep.min_yield[a.index()];
        self.pend_extra -= self.prep.min_nodes[a.index()] - 1;

        let g = self.g;
        let first_child = self.nodes.len() as u32;
        let child_stack = match &g.productions()[rule] {
            IndexedProduction::Push { rhs, index, .. } => {
                self.add_node(node, 1, Label::N(*rhs, stack.push(*index)));
                None
            }
            IndexedProduction::Pop { rhs, .. } => Some((rhs, stack.rest())),
            IndexedProduction::Plain { rhs, .. } => Some((rhs, stack)),
        };
        if let Some((rhs, gamma)) = child_stack {
            if rhs.is_empty() {
                self.add_node(node, 1, Label::Leaf(None));
            }
            for (i, s) in rhs.iter().enumerate() {
                let label = match s {
                    Symbol::N(b) => Label::N(*b, gamma.clone()),
                    Symbol::T(t) => Label::Leaf(Some(*t)),
                };
                self.add_node(node, i as u32 + 1, label);
            }
        }
        let last_child = self.nodes.len() as u32;
        self.pending.extend((first_child..last_child).rev());

        while let Some(&top) = self.pending.last() {
            let Label::Leaf(t) = self.nodes[top as usize].label else {
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
        self.emitted.truncate(saved.emitted_len);
        self.pend_yield = saved.pend_yield;
        self.pend_extra = saved.pend_extra;
        self.mismatch = false;
    }

    fn pruned(&mut self) -> bool {
        if self.mismatch || self.emitted.len() + self.pend_yield > self.goal.max_len() {
            return true;
        }
        if self.nodes.len() + self.pend_extra > self.bound {
            self.truncated = true;
            return true;
        }
        false
    }

    /// Runs the search, calling `on_complete` for each complete tree. The
    /// callback returns `false` to stop.
    fn run(&mut self, on_complete: &mut dyn FnMut(&Search<'g>) -> bool) {
        let start = self.g.start();
        self.add_node(NO_PARENT, 0, Label::N(start, Stack::default()));
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
                if !self.applicable(node, rule) {
                    continue;
                }
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
                if complete && size_ok && !on_complete(self) {
                    return;
                }
            }
        }
    }

    fn tree(&self) -> DerivationTree {
        let mut addrs: Vec<TreeAddress> = Vec::with_capacity(self.nodes.len());
        let mut labels = BTreeMap::new();
        for n in &self.nodes {
            let addr = if n.parent == NO_PARENT {
                TreeAddress::root()
            } else {
                addrs[n.parent as usize].child(n.child_no)
            };
            let label = match &n.label {
                Label::N(a, s) => IxLabel::Node {
                    symbol: *a,
                    stack: s.to_vec(),
                },
                Label::Leaf(t) => IxLabel::Leaf(*t),
            };
            labels.insert(addr.clone(), label);
            addrs.push(addr);
        }
        DerivationTree::new(labels).expect("search builds well-formed domains")
    }
}

/// Outcome of a bounded membership query.
#[derive(Clone, Debug)]
pub enum Membership<W> {
    Yes(W),
    /// No witness within the budget. This is not a proof of non-membership.
    NoWithinBudget(SearchStats),
}

impl<W> Membership<W> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Membership::Yes(w) => Some(w),
            Membership::NoWithinBudget(_) => None,
        }
    }
}

/// Strings of bounded length found by a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedLanguage {
    pub words: BTreeSet<Vec<Term>>,
    pub stats: SearchStats,
}

pub(crate) fn check_word(g: &IndexedGrammar, w: &[Term]) -> Result<(), WordError> {
    match w.iter().find(|t| t.index() >= g.terminals().len()) {
        Some(t) => Err(WordError::UnknownTerminal(format!("#{}", t.0))),
        None => Ok(()),
    }
}

/// Searches for a derivation tree with terminal string `w`.
///
/// Node bounds are deepened step by step up to `max_nodes`; the witness is a
/// smallest tree, ties broken by production order.
pub fn indexed_membership(
    g: &IndexedGrammar,
    w: &[Term],
    budget: Budget,
) -> Result<Membership<DerivationTree>, WordError> {
    check_word(g, w)?;
    let prep = Prepared::new(g);
    let mut stats = SearchStats::default();
    for bound in deepening_bounds(budget.max_nodes) {
        let remaining = budget.max_trees.saturating_sub(stats.steps);
        let mut search = Search::new(g, &prep, Goal::Word(w), bound, false, remaining);
        let mut best: Option<(usize, DerivationTree)> = None;
        search.run(&mut |s| {
            if best.as_ref().is_none_or(|(n, _)| s.nodes.len() < *n) {
                best = Some((s.nodes.len(), s.tree()));
            }
            true
        });
        stats.steps += search.steps;
        if let Some((_, tree)) = best {
            return Ok(Membership::Yes(tree));
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

/// All terminal strings of length at most `maxlen` with a derivation tree
/// inside the budget.
pub fn indexed_language_upto(g: &IndexedGrammar, maxlen: usize, budget: Budget) -> IndexedLanguage {
    let prep = Prepared::new(g);
    let mut stats = SearchStats::default();
    let mut words: BTreeMap<Vec<Term>, usize> = BTreeMap::new();
    for bound in deepening_bounds(budget.max_nodes) {
        let remaining = budget.max_trees.saturating_sub(stats.steps);
        let mut search = Search::new(g, &prep, Goal::MaxLen(maxlen), bound, false, remaining);
        search.run(&mut |s| {
            let n = s.nodes.len();
            words
                .entry(s.emitted.clone())
                .and_modify(|m| *m = (*m).min(n))
                .or_insert(n);
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
    IndexedLanguage {
        words: words.into_keys().collect(),
        stats,
    }
}

/// Stream of derivation trees in ascending size, and within one size in
/// lexicographic order of the productions applied in `≺` order.
pub struct DerivationEnumerator<'g> {
    g: &'g IndexedGrammar,
    prep: Prepared,
    budget: Budget,
    level: usize,
    buffer: VecDeque<DerivationTree>,
    steps: usize,
    done: bool,
    exhausted: bool,
}

impl DerivationEnumerator<'_> {
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
            let mut search = Search::new(
                self.g,
                &self.prep,
                Goal::MaxLen(usize::MAX / 4),
                self.level,
                true,
                remaining,
            );
            let buffer = &mut self.buffer;
            search.run(&mut |s| {
                buffer.push_back(s.tree());
                true
            });
            self.steps += search.steps;
            if search.exhausted {
                self.exhausted = true;
                self.done = true;
            } else if !search.truncated {
                // nothing larger exists
                self.done = true;
            }
            self.level += 1;
        }
    }
}

impl Iterator for DerivationEnumerator<'_> {
    type Item = DerivationTree;

    fn next(&mut self) -> Option<DerivationTree> {
        self.fill();
        self.buffer.pop_front()
    }
}

pub fn enumerate_derivations(g: &IndexedGrammar, budget: Budget) -> DerivationEnumerator<'_> {
    let prep = Prepared::new(g);
    let level = prep.min_nodes[g.start().index()].clamp(2, UNREACHABLE);
    let done = prep.min_nodes[g.start().index()] >= UNREACHABLE || budget.max_nodes < 2;
    DerivationEnumerator {
        g,
        prep,
        budget,
        level,
        buffer: VecDeque::new(),
        steps: 0,
        done,
        exhausted: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_indexed_grammar;
    use crate::testdata::{aabbcc_tree, ABC_IXG, DOUBLING_IXG};

    fn word(g: &IndexedGrammar, s: &str) -> Vec<Term> {
        s.chars().map(|c| g.term(&c.to_string()).unwrap()).collect()
    }

    fn show(g: &IndexedGrammar, w: &[Term]) -> String {
        w.iter().map(|&t| g.term_name(t)).collect()
    }

    #[test]
    fn single_rule_grammar_has_one_tree() {
        let g = parse_indexed_grammar("nonterminals S\nterminals a\nindices\nstart S\nS -> a\n")
            .unwrap();
        let trees: Vec<_> = enumerate_derivations(&g, Budget::default()).collect();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].len(), 2);
        assert_eq!(trees[0].label(&"1".parse().unwrap()), Some(&IxLabel::Leaf(Some(Term(0)))));
    }

    #[test]
    fn enumeration_contains_aabbcc_tree() {
        let g = parse_indexed_grammar(ABC_IXG).unwrap();
        let fig = aabbcc_tree(&g);
        let trees: Vec<_> = enumerate_derivations(&g, Budget::new(25, 1_000_000)).collect();
        assert!(trees.contains(&fig));
        assert!(trees.iter().all(|t| t.validate(&g).is_ok()));
        assert!(trees.windows(2).all(|w| w[0].len() <= w[1].len()));
        // smallest tree: S -> S'f, S' -> ABC, three pops: abc
        assert_eq!(show(&g, &trees[0].terminal_string()), "abc");
    }

    #[test]
    fn doubling_smallest_yield_is_dd() {
        let g = parse_indexed_grammar(DOUBLING_IXG).unwrap();
        let first = enumerate_derivations(&g, Budget::new(40, 1_000_000)).next().unwrap();
        assert_eq!(show(&g, &first.terminal_string()), "dd");
    }

    #[test]
    fn membership_examples() {
        let g1 = parse_indexed_grammar(ABC_IXG).unwrap();
        let yes = indexed_membership(&g1, &word(&g1, "aabbcc"), Budget::default()).unwrap();
        assert_eq!(yes.witness(), Some(&aabbcc_tree(&g1)));
        assert!(!indexed_membership(&g1, &[], Budget::default()).unwrap().is_yes());

        let g2 = parse_indexed_grammar(DOUBLING_IXG).unwrap();
        let no = indexed_membership(&g2, &word(&g2, "ddd"), Budget::default()).unwrap();
        assert!(!no.is_yes());
        assert!(indexed_membership(&g2, &[Term(7)], Budget::default()).is_err());
    }

    #[test]
    fn languages_of_the_examples() {
        let g1 = parse_indexed_grammar(ABC_IXG).unwrap();
        let l1 = indexed_language_upto(&g1, 9, Budget::default());
        let got: Vec<String> = l1.words.iter().map(|w| show(&g1, w)).collect();
        assert_eq!(got, ["abc", "aabbcc", "aaabbbccc"].map(String::from).to_vec().into_iter().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>());
        assert!(!l1.stats.exhausted);

        let g2 = parse_indexed_grammar(DOUBLING_IXG).unwrap();
        let l2 = indexed_language_upto(&g2, 8, Budget::default());
        let got: BTreeSet<usize> = l2.words.iter().map(Vec::len).collect();
        assert_eq!(got, BTreeSet::from([2, 4, 8]));
        assert!(!l2.stats.exhausted);

        assert!(indexed_language_upto(&g1, 0, Budget::default()).words.is_empty());
    }

    #[test]
    fn empty_word_language() {
        let g = parse_indexed_grammar("nonterminals S\nterminals a\nindices\nstart S\nS -> _\nS -> a\n")
            .unwrap();
        let l = indexed_language_upto(&g, 0, Budget::default());
        assert_eq!(l.words, BTreeSet::from([vec![]]));
    }

    #[test]
    fn push_loop_truncates_honestly() {
        // S -> S ^f forever, S -> a: "a" is found and the search reports truncation
        let g = parse_indexed_grammar("nonterminals S\nterminals a\nindices f\nstart S\nS -> S ^f\nS -> a\n")
            .unwrap();
        let l = indexed_language_upto(&g, 2, Budget::new(64, 1_000_000));
        assert_eq!(l.words.len(), 1);
        assert!(l.stats.truncated);
        assert!(!l.stats.exhausted);
    }
}
