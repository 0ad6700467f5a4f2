//! Exact bounded-length languages of grammars over index stacks.
//!
//! Both formalisms reduce to rules that copy, push onto or pop from a stack
//! of symbols. For every nonterminal `X` and every possible top of stack `c`
//! (a symbol, or `⊥` for the empty stack) we compute the set of *patterns*
//! of the derivations from `X` with top `c`: strings over terminals and
//! holes, where a hole `Y` marks a subtree that starts at `Y` with the part
//! of the stack below `c`. Holes in the string must yield a non-empty word;
//! holes that must yield ε are kept as a set beside the string. Bounding the
//! string by the word length makes every pattern set finite, so the sets are
//! computed as a least fixpoint, whatever the sizes of the trees involved.
//!
//! A derivation with stack `c γ` is a pattern of `P_c(X)` with every hole
//! `Y` filled by a derivation from `Y` with stack `γ`.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::symbol::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    Copy,
    Push(u32),
    Pop,
}

#[derive(Clone, Debug)]
pub(crate) enum Item {
    T(Term),
    N(usize, Op),
}

/// `lhs → items`, applicable when the top of the stack is `top` (any top
/// when `None`). `Pop` items receive the stack below that top.
#[derive(Clone, Debug)]
pub(crate) struct StackRule {
    pub lhs: usize,
    pub top: Option<u32>,
    pub items: Vec<Item>,
}

pub(crate) struct StackGrammar {
    pub nonterminals: usize,
    pub terminals: usize,
    pub symbols: usize,
    pub rules: Vec<StackRule>,
}

/// Terminals are `0..T`, hole `Y` is `T + Y`.
type Sym = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Pattern {
    seq: Vec<Sym>,
    eps: u128,
}

#[derive(Default)]
struct PatternSet {
    /// Patterns with a non-empty string.
    full: Vec<Pattern>,
    /// ε-hole sets of patterns with an empty string.
    empty: Vec<u128>,
    seen: HashSet<Pattern>,
}

impl PatternSet {
    fn insert(&mut self, p: Pattern) -> bool {
        if self.seen.contains(&p) {
            return false;
        }
        if p.seq.is_empty() {
            self.empty.push(p.eps);
        } else {
            self.full.push(p.clone());
        }
        self.seen.insert(p);
        true
    }

    fn len(&self) -> usize {
        self.seen.len()
    }
}

/// The pattern sets were too large to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TooLarge;

pub(crate) struct Patterns<'a> {
    g: &'a StackGrammar,
    maxlen: usize,
    /// `sets[c][X]`, context 0 is `⊥` and context `f + 1` is symbol `f`.
    sets: Vec<Vec<PatternSet>>,
}

/// Partial result while expanding one rule.
struct Partial {
    seq: Vec<Sym>,
    eps: u128,
}

impl<'a> Patterns<'a> {
    pub fn compute(g: &'a StackGrammar, maxlen: usize, cap: usize) -> Result<Self, TooLarge> {
        if g.nonterminals > 128 {
            return Err(TooLarge);
        }
        let contexts = g.symbols + 1;
        let mut p = Patterns {
            g,
            maxlen,
            sets: (0..contexts)
                .map(|_| (0..g.nonterminals).map(|_| PatternSet::default()).collect())
                .collect(),
        };
        loop {
            let mut changed = false;
            for c in 0..contexts {
                for rule in &g.rules {
                    let applicable = match rule.top {
                        None => true,
                        Some(f) => c == f as usize + 1,
                    };
                    if !applicable {
                        continue;
                    }
                    let mut out = Vec::new();
                    let mut part = Partial {
                        seq: Vec::new(),
                        eps: 0,
                    };
                    p.expand(c, &rule.items, &mut part, &mut out);
                    for pat in out {
                        changed |= p.sets[c][rule.lhs].insert(pat);
                    }
                }
            }
            let total: usize = p.sets.iter().flatten().map(PatternSet::len).sum();
            if total > cap {
                return Err(TooLarge);
            }
            if !changed {
                break;
            }
        }
        Ok(p)
    }

    fn hole(&self, y: usize) -> Sym {
        (self.g.terminals + y) as Sym
    }

    fn expand(&self, c: usize, items: &[Item], part: &mut Partial, out: &mut Vec<Pattern>) {
        let Some((item, rest)) = items.split_first() else {
            out.push(Pattern {
                seq: part.seq.clone(),
                eps: part.eps,
            });
            return;
        };
        match *item {
            Item::T(t) => {
                if part.seq.len() < self.maxlen {
                    part.seq.push(t.0);
                    self.expand(c, rest, part, out);
                    part.seq.pop();
                }
            }
            Item::N(y, Op::Copy) => self.splice(c, y, part, &mut |s, part| s.expand(c, rest, part, out)),
            Item::N(y, Op::Pop) => {
                debug_assert!(c > 0, "pops need a symbol on top");
                if part.seq.len() < self.maxlen {
                    part.seq.push(self.hole(y));
                    self.expand(c, rest, part, out);
                    part.seq.pop();
                }
                let saved = part.eps;
                part.eps |= 1 << y;
                self.expand(c, rest, part, out);
                part.eps = saved;
            }
            Item::N(y, Op::Push(f)) => {
                let inner = &self.sets[f as usize + 1][y];
                let (full, empty) = (inner.full.len(), inner.empty.len());
                for i in 0..full {
                    let pat = &inner.full[i];
                    if part.seq.len() + pat.seq.len() > self.maxlen {
                        continue;
                    }
                    self.fill(c, &pat.seq, pat.eps, part, &mut |s, part| s.expand(c, rest, part, out));
                }
                for i in 0..empty {
                    let eps = inner.empty[i];
                    self.fill(c, &[], eps, part, &mut |s, part| s.expand(c, rest, part, out));
                }
            }
        }
    }

    /// Appends each pattern of `P_c(y)` to `part` in turn.
    fn splice(&self, c: usize, y: usize, part: &mut Partial, k: &mut dyn FnMut(&Self, &mut Partial)) {
        let set = &self.sets[c][y];
        let (full, empty) = (set.full.len(), set.empty.len());
        for i in 0..full {
            let pat = &set.full[i];
            if part.seq.len() + pat.seq.len() > self.maxlen {
                continue;
            }
            let (len, eps) = (part.seq.len(), part.eps);
            part.seq.extend_from_slice(&pat.seq);
            part.eps |= pat.eps;
            k(self, part);
            part.seq.truncate(len);
            part.eps = eps;
        }
        for i in 0..empty {
            let eps = part.eps;
            part.eps |= set.empty[i];
            k(self, part);
            part.eps = eps;
        }
    }

    /// Appends `seq` to `part` with every hole filled from context `c`, then
    /// adds the ε-holes in `eps`, each filled by an empty pattern.
    fn fill(&self, c: usize, seq: &[Sym], eps: u128, part: &mut Partial, k: &mut dyn FnMut(&Self, &mut Partial)) {
        if let Some((&s, rest)) = seq.split_first() {
            let t = self.g.terminals as Sym;
            if s < t {
                if part.seq.len() < self.maxlen {
                    part.seq.push(s);
                    self.fill(c, rest, eps, part, k);
                    part.seq.pop();
                }
                return;
            }
            let y = (s - t) as usize;
            let set = &self.sets[c][y];
            for i in 0..set.full.len() {
                let pat = &set.full[i];
                // the rest of `seq` needs at least one symbol per element
                if part.seq.len() + pat.seq.len() + rest.len() > self.maxlen {
                    continue;
                }
                let (len, e) = (part.seq.len(), part.eps);
                part.seq.extend_from_slice(&pat.seq);
                part.eps |= pat.eps;
                self.fill(c, rest, eps, part, k);
                part.seq.truncate(len);
                part.eps = e;
            }
            return;
        }
        if eps == 0 {
            k(self, part);
            return;
        }
        let y = eps.trailing_zeros() as usize;
        let rest = eps & !(1 << y);
        let set = &self.sets[c][y];
        for i in 0..set.empty.len() {
            let e = part.eps;
            part.eps |= set.empty[i];
            self.fill(c, &[], rest, part, k);
            part.eps = e;
        }
    }

    /// Words derivable from `x` with an empty stack.
    pub fn words_from_empty(&self, x: usize) -> BTreeSet<Vec<Term>> {
        let set = &self.sets[0][x];
        let mut out: BTreeSet<Vec<Term>> = set.full.iter().map(|p| p.seq.iter().map(|&s| Term(s)).collect()).collect();
        if !set.empty.is_empty() {
            out.insert(Vec::new());
        }
        out
    }

    /// Words derivable from `x` for some stack: the symbols on the stack are
    /// unknown and chosen as the derivation inspects them, one at a time and
    /// shared by every subtree that reaches the same stack.
    pub fn words_from_any(&self, x: usize, cap: usize) -> Result<BTreeSet<Vec<Term>>, TooLarge> {
        let start = [
            Pattern {
                seq: vec![self.hole(x)],
                eps: 0,
            },
            Pattern {
                seq: Vec::new(),
                eps: 1 << x,
            },
        ];
        let t = self.g.terminals as Sym;
        let mut seen: HashSet<Pattern> = HashSet::new();
        let mut queue: VecDeque<Pattern> = VecDeque::new();
        let mut words = BTreeSet::new();
        for p in start {
            if p.seq.len() <= self.maxlen && seen.insert(p.clone()) {
                queue.push_back(p);
            }
        }
        while let Some(p) = queue.pop_front() {
            if p.eps == 0 && p.seq.iter().all(|&s| s < t) {
                words.insert(p.seq.iter().map(|&s| Term(s)).collect());
                continue;
            }
            for c in 0..self.sets.len() {
                let mut part = Partial {
                    seq: Vec::new(),
                    eps: 0,
                };
                let mut next = Vec::new();
                self.fill(c, &p.seq, p.eps, &mut part, &mut |_, part| {
                    next.push(Pattern {
                        seq: part.seq.clone(),
                        eps: part.eps,
                    })
                });
                for q in next {
                    if seen.insert(q.clone()) {
                        queue.push_back(q);
                    }
                }
            }
            if seen.len() > cap {
                return Err(TooLarge);
            }
        }
        Ok(words)
    }
}
