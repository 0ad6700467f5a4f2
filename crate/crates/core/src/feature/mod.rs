//! Feature structures and the equations that describe them.
//!
//! A feature structure is a finite graph: nodes, a partial transition
//! function `δ` over attributes, a partial atomic-value function `α`, and a
//! name mapping from tree addresses to nodes.

mod closure;
mod solver;

pub(crate) use closure::Closure;
pub(crate) use solver::assert_equation;
pub use solver::{solve, Diagnosis, SolveResult};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::symbol::{Attr, SymbolSet, Value};
use crate::tree::TreeAddress;

pub type NodeId = usize;
pub type Path = Vec<Attr>;

/// `x₁ψ₁ ≐ x₂ψ₂` or `x ψ ≐ v` with `ψ` non-empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Equation {
    PathEq {
        x1: TreeAddress,
        p1: Path,
        x2: TreeAddress,
        p2: Path,
    },
    ValEq {
        x: TreeAddress,
        path: Path,
        value: Value,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error("a value equation needs a non-empty path")]
    EmptyValuePath,
    #[error("name {0} is not in the name domain")]
    UnknownName(TreeAddress),
}

impl Equation {
    pub fn path_eq(x1: TreeAddress, p1: Path, x2: TreeAddress, p2: Path) -> Self {
        Equation::PathEq { x1, p1, x2, p2 }
    }

    pub fn val_eq(x: TreeAddress, path: Path, value: Value) -> Result<Self, EquationError> {
        if path.is_empty() {
            return Err(EquationError::EmptyValuePath);
        }
        Ok(Equation::ValEq { x, path, value })
    }

    /// The names this equation mentions.
    pub fn names(&self) -> Vec<&TreeAddress> {
        match self {
            Equation::PathEq { x1, x2, .. } => vec![x1, x2],
            Equation::ValEq { x, .. } => vec![x],
        }
    }

    pub fn display<'a>(&'a self, attrs: &'a SymbolSet, values: &'a SymbolSet) -> impl fmt::Display + 'a {
        EquationDisplay {
            e: self,
            attrs,
            values,
        }
    }
}

struct EquationDisplay<'a> {
    e: &'a Equation,
    attrs: &'a SymbolSet,
    values: &'a SymbolSet,
}

fn write_term(f: &mut fmt::Formatter<'_>, attrs: &SymbolSet, x: &TreeAddress, p: &[Attr]) -> fmt::Result {
    write!(f, "{x}")?;
    for a in p {
        write!(f, " {}", attrs.name(a.0))?;
    }
    Ok(())
}

impl fmt::Display for EquationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Equation::PathEq { x1, p1, x2, p2 } => {
                write_term(f, self.attrs, x1, p1)?;
                f.write_str(" = ")?;
                write_term(f, self.attrs, x2, p2)
            }
            Equation::ValEq { x, path, value } => {
                write_term(f, self.attrs, x, path)?;
                write!(f, " = {}", self.values.name(value.0))
            }
        }
    }
}

/// A name followed by an attribute path, `x ψ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathTerm {
    pub name: TreeAddress,
    pub path: Path,
}

/// `⟨Q, δ, α, m⟩` with `Q = {0, …, n-1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureStructure {
    node_count: usize,
    delta: BTreeMap<(NodeId, Attr), NodeId>,
    alpha: BTreeMap<NodeId, Value>,
    names: BTreeMap<TreeAddress, NodeId>,
}

/// Result of the three well-definedness checks, each with a witness on
/// failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellDefinedReport {
    /// A node not reachable from any named node.
    pub unreachable: Option<NodeId>,
    /// A node with an atomic value and an out-edge.
    pub atom_with_edge: Option<NodeId>,
    /// A node and a non-empty path leading back to it.
    pub cycle: Option<(NodeId, Path)>,
}

impl WellDefinedReport {
    pub fn describable(&self) -> bool {
        self.unreachable.is_none()
    }

    pub fn atomic(&self) -> bool {
        self.atom_with_edge.is_none()
    }

    pub fn acyclic(&self) -> bool {
        self.cycle.is_none()
    }

    pub fn is_well_defined(&self) -> bool {
        self.describable() && self.atomic() && self.acyclic()
    }
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self) -> NodeId {
        self.node_count += 1;
        self.node_count - 1
    }

    pub fn set_edge(&mut self, q: NodeId, a: Attr, p: NodeId) {
        assert!(q < self.node_count && p < self.node_count, "node out of range");
        self.delta.insert((q, a), p);
    }

    pub fn set_value(&mut self, q: NodeId, v: Value) {
        assert!(q < self.node_count, "node out of range");
        self.alpha.insert(q, v);
    }

    pub fn set_name(&mut self, x: TreeAddress, q: NodeId) {
        assert!(q < self.node_count, "node out of range");
        self.names.insert(x, q);
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &BTreeMap<(NodeId, Attr), NodeId> {
        &self.delta
    }

    pub fn values(&self) -> &BTreeMap<NodeId, Value> {
        &self.alpha
    }

    pub fn names(&self) -> &BTreeMap<TreeAddress, NodeId> {
        &self.names
    }

    pub fn name(&self, x: &TreeAddress) -> Option<NodeId> {
        self.names.get(x).copied()
    }

    pub fn delta(&self, q: NodeId, a: Attr) -> Option<NodeId> {
        self.delta.get(&(q, a)).copied()
    }

    pub fn alpha(&self, q: NodeId) -> Option<Value> {
        self.alpha.get(&q).copied()
    }

    /// `δ(q, ψ)`, undefined as soon as one step is.
    pub fn delta_path(&self, q: NodeId, path: &[Attr]) -> Option<NodeId> {
        path.iter().try_fold(q, |q, &a| self.delta(q, a))
    }

    fn out_edges(&self, q: NodeId) -> impl Iterator<Item = (Attr, NodeId)> + '_ {
        self.delta
            .range((q, Attr(0))..=(q, Attr(u32::MAX)))
            .map(|(&(_, a), &p)| (a, p))
    }

    pub fn well_defined_check(&self) -> WellDefinedReport {
        let mut seen = vec![false; self.node_count];
        let mut queue: VecDeque<NodeId> = self.names.values().copied().collect();
        while let Some(q) = queue.pop_front() {
            if std::mem::replace(&mut seen[q], true) {
                continue;
            }
            queue.extend(self.out_edges(q).map(|(_, p)| p));
        }
        let unreachable = seen.iter().position(|s| !s);
        let atom_with_edge = self
            .alpha
            .keys()
            .copied()
            .find(|&q| self.out_edges(q).next().is_some());
        WellDefinedReport {
            unreachable,
            atom_with_edge,
            cycle: self.find_cycle(),
        }
    }

    /// First cycle met by a depth-first search visiting nodes and attributes
    /// in ascending order.
    fn find_cycle(&self) -> Option<(NodeId, Path)> {
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let mut color = vec![WHITE; self.node_count];
        for root in 0..self.node_count {
            if color[root] != WHITE {
                continue;
            }
            // stack of (node, remaining out-edges, attribute used to enter)
            let mut stack: Vec<(NodeId, Vec<(Attr, NodeId)>, Option<Attr>)> = Vec::new();
            color[root] = GREY;
            stack.push((root, self.out_edges(root).collect::<Vec<_>>(), None));
            while let Some((_, edges, _)) = stack.last_mut() {
                if edges.is_empty() {
                    let (q, _, _) = stack.pop().unwrap();
                    color[q] = BLACK;
                    continue;
                }
                let (a, p) = edges.remove(0);
                match color[p] {
                    WHITE => {
                        color[p] = GREY;
                        let next = self.out_edges(p).collect();
                        stack.push((p, next, Some(a)));
                    }
                    GREY => {
                        let start = stack.iter().position(|(q, _, _)| *q == p).unwrap();
                        let mut path: Path = stack[start + 1..]
                            .iter()
                            .map(|(_, _, a)| a.unwrap())
                            .collect();
                        path.push(a);
                        return Some((p, path));
                    }
                    _ => {}
                }
            }
        }
        None
    }

    pub fn satisfies(&self, e: &Equation) -> Result<bool, EquationError> {
        let node = |x: &TreeAddress| {
            self.name(x)
                .ok_or_else(|| EquationError::UnknownName(x.clone()))
        };
        Ok(match e {
            Equation::PathEq { x1, p1, x2, p2 } => {
                let l = self.delta_path(node(x1)?, p1);
                let r = self.delta_path(node(x2)?, p2);
                l.is_some() && l == r
            }
            Equation::ValEq { x, path, value } => self
                .delta_path(node(x)?, path)
                .and_then(|q| self.alpha(q))
                == Some(*value),
        })
    }

    /// `M ⊨ E`: every equation holds. Well-definedness is checked separately.
    pub fn satisfies_set<'a>(
        &self,
        es: impl IntoIterator<Item = &'a Equation>,
    ) -> Result<bool, EquationError> {
        for e in es {
            if !self.satisfies(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The sub-structure reachable from named nodes, renumbered in
    /// breadth-first order from the names in address order.
    pub fn restrict_to_reachable(&self) -> FeatureStructure {
        let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        let mut order = Vec::new();
        let mut queue: VecDeque<NodeId> = self.names.values().copied().collect();
        while let Some(q) = queue.pop_front() {
            if map.contains_key(&q) {
                continue;
            }
            map.insert(q, order.len());
            order.push(q);
            queue.extend(self.out_edges(q).map(|(_, p)| p));
        }
        let mut out = FeatureStructure::new();
        for _ in &order {
            out.add_node();
        }
        for (&(q, a), &p) in &self.delta {
            if let (Some(&nq), Some(&np)) = (map.get(&q), map.get(&p)) {
                out.set_edge(nq, a, np);
            }
        }
        for (&q, &v) in &self.alpha {
            if let Some(&nq) = map.get(&q) {
                out.set_value(nq, v);
            }
        }
        for (x, q) in &self.names {
            out.set_name(x.clone(), map[q]);
        }
        out
    }

    /// Is there a bijection between the nodes that preserves names, edges and
    /// values?
    pub fn isomorphic(&self, other: &FeatureStructure) -> bool {
        if self.node_count != other.node_count
            || self.delta.len() != other.delta.len()
            || self.alpha.len() != other.alpha.len()
            || self.names.keys().ne(other.names.keys())
        {
            return false;
        }
        let mut fwd: Vec<Option<NodeId>> = vec![None; self.node_count];
        let mut bwd: Vec<Option<NodeId>> = vec![None; other.node_count];
        let mut queue: VecDeque<(NodeId, NodeId)> = VecDeque::new();
        for (x, &q) in &self.names {
            queue.push_back((q, other.names[x]));
        }
        let mut pair = |q: NodeId, p: NodeId, queue: &mut VecDeque<(NodeId, NodeId)>| {
            match (fwd[q], bwd[p]) {
                (None, None) => {
                    fwd[q] = Some(p);
                    bwd[p] = Some(q);
                    queue.push_back((q, p));
                    true
                }
                (Some(p2), Some(q2)) => p2 == p && q2 == q,
                _ => false,
            }
        };
        let initial: Vec<(NodeId, NodeId)> = queue.drain(..).collect();
        for (q, p) in initial {
            if !pair(q, p, &mut queue) {
                return false;
            }
        }
        while let Some((q, p)) = queue.pop_front() {
            if self.alpha(q) != other.alpha(p) {
                return false;
            }
            let mine: Vec<_> = self.out_edges(q).collect();
            let theirs: Vec<_> = other.out_edges(p).collect();
            if mine.len() != theirs.len() {
                return false;
            }
            for ((a, q2), (b, p2)) in mine.into_iter().zip(theirs) {
                if a != b || !pair(q2, p2, &mut queue) {
                    return false;
                }
            }
        }
        // nodes unreachable from names must pair up too; compare them by count
        let unmatched_self = fwd.iter().filter(|m| m.is_none()).count();
        let unmatched_other = bwd.iter().filter(|m| m.is_none()).count();
        unmatched_self == 0 && unmatched_other == 0
    }

    /// Attributes used on edges, sorted.
    pub fn attributes(&self) -> BTreeSet<Attr> {
        self.delta.keys().map(|&(_, a)| a).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> TreeAddress {
        s.parse().unwrap()
    }

    const NEXT: Attr = Attr(0);
    const IDX: Attr = Attr(1);

    #[test]
    fn delta_path_follows_edges() {
        let mut m = FeatureStructure::new();
        let (q0, q1, q2) = (m.add_node(), m.add_node(), m.add_node());
        m.set_edge(q0, Attr(0), q1);
        m.set_edge(q1, Attr(1), q2);
        assert_eq!(m.delta_path(q0, &[]), Some(q0));
        assert_eq!(m.delta_path(q0, &[Attr(0), Attr(1)]), Some(q2));
        assert_eq!(m.delta_path(q0, &[Attr(0), Attr(0)]), None);
    }

    #[test]
    fn well_definedness_witnesses() {
        let mut m = FeatureStructure::new();
        let q = m.add_node();
        let p = m.add_node();
        m.set_name(a("ε"), q);
        m.set_value(q, Value(0));
        m.set_edge(q, NEXT, p);
        let r = m.well_defined_check();
        assert_eq!(r.atom_with_edge, Some(q));
        assert!(r.describable());

        let mut m = FeatureStructure::new();
        let q = m.add_node();
        let lonely = m.add_node();
        m.set_name(a("ε"), q);
        let r = m.well_defined_check();
        assert_eq!(r.unreachable, Some(lonely));
        assert!(r.atomic() && r.acyclic());

        let mut m = FeatureStructure::new();
        let (q, p) = (m.add_node(), m.add_node());
        m.set_name(a("ε"), q);
        m.set_edge(q, NEXT, p);
        m.set_edge(p, IDX, q);
        assert_eq!(m.well_defined_check().cycle, Some((q, vec![NEXT, IDX])));
    }

    #[test]
    fn satisfaction() {
        let mut m = FeatureStructure::new();
        let (q, p) = (m.add_node(), m.add_node());
        m.set_name(a("1"), q);
        m.set_edge(q, IDX, p);
        m.set_value(p, Value(0));
        let yes = Equation::val_eq(a("1"), vec![IDX], Value(0)).unwrap();
        let no = Equation::val_eq(a("1"), vec![IDX], Value(1)).unwrap();
        let refl = Equation::path_eq(a("1"), vec![], a("1"), vec![]);
        assert!(m.satisfies(&yes).unwrap());
        assert!(!m.satisfies(&no).unwrap());
        assert!(m.satisfies(&refl).unwrap());
        assert!(m.satisfies_set(&[]).unwrap());
        assert!(!m.satisfies_set(&[yes, no]).unwrap());
        let unknown = Equation::path_eq(a("2"), vec![], a("1"), vec![]);
        assert!(m.satisfies(&unknown).is_err());
    }

    #[test]
    fn empty_value_path_is_rejected() {
        assert_eq!(
            Equation::val_eq(a("1"), vec![], Value(0)),
            Err(EquationError::EmptyValuePath)
        );
    }

    #[test]
    fn isomorphism_ignores_numbering() {
        let mut m = FeatureStructure::new();
        let (q, p) = (m.add_node(), m.add_node());
        m.set_name(a("1"), q);
        m.set_edge(q, IDX, p);
        m.set_value(p, Value(0));

        let mut n = FeatureStructure::new();
        let (p2, q2) = (n.add_node(), n.add_node());
        n.set_name(a("1"), q2);
        n.set_edge(q2, IDX, p2);
        n.set_value(p2, Value(0));
        assert!(m.isomorphic(&n));

        n.set_value(p2, Value(1));
        assert!(!m.isomorphic(&n));
    }
}
