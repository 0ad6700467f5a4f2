//! Incremental congruence closure with undo.
//!
//! Every term `x ψ` is a node; a node's class records its outgoing attribute
//! edges and, for classes equated with a value symbol, that value. Merging
//! two classes merges their same-attribute successors, which keeps `δ` a
//! function. Value symbols act as constants: all terms equated with `v` end
//! up in one class. Union is by rank without path compression so that every
//! change can be undone from the trail.

use std::collections::HashMap;

use super::{FeatureStructure, PathTerm};
use crate::symbol::{Attr, Value};
use crate::tree::TreeAddress;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Origin {
    Name(u32),
    Child(u32, Attr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Conflict {
    /// The classes of these nodes carry the two values.
    Clash(u32, Value, Value),
    /// This node's class has a value and an out-edge.
    Atomicity(u32),
}

enum Undo {
    Node,
    Name(TreeAddress),
    ValueNode(Value),
    Edge(u32),
    SetValue(u32),
    Union {
        child: u32,
        root: u32,
        rank_bumped: bool,
        edges_len: usize,
        value_was: Option<Value>,
    },
}

#[derive(Default)]
pub(crate) struct Closure {
    parent: Vec<u32>,
    rank: Vec<u8>,
    edges: Vec<Vec<(Attr, u32)>>,
    value: Vec<Option<Value>>,
    origin: Vec<Origin>,
    names: HashMap<TreeAddress, u32>,
    name_list: Vec<TreeAddress>,
    value_nodes: HashMap<Value, u32>,
    trail: Vec<Undo>,
}

impl Closure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Node => {
                    self.parent.pop();
                    self.rank.pop();
                    self.edges.pop();
                    self.value.pop();
                    self.origin.pop();
                }
                Undo::Name(x) => {
                    self.names.remove(&x);
                    self.name_list.pop();
                }
                Undo::ValueNode(v) => {
                    self.value_nodes.remove(&v);
                }
                Undo::Edge(root) => {
                    self.edges[root as usize].pop();
                }
                Undo::SetValue(root) => self.value[root as usize] = None,
                Undo::Union {
                    child,
                    root,
                    rank_bumped,
                    edges_len,
                    value_was,
                } => {
                    self.parent[child as usize] = child;
                    if rank_bumped {
                        self.rank[root as usize] -= 1;
                    }
                    self.edges[root as usize].truncate(edges_len);
                    self.value[root as usize] = value_was;
                }
            }
        }
    }

    fn new_node(&mut self, origin: Origin) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.rank.push(0);
        self.edges.push(Vec::new());
        self.value.push(None);
        self.origin.push(origin);
        self.trail.push(Undo::Node);
        id
    }

    pub fn find(&self, mut n: u32) -> u32 {
        while self.parent[n as usize] != n {
            n = self.parent[n as usize];
        }
        n
    }

    pub fn name_node(&mut self, x: &TreeAddress) -> u32 {
        if let Some(&n) = self.names.get(x) {
            return n;
        }
        let n = self.new_node(Origin::Name(self.name_list.len() as u32));
        self.names.insert(x.clone(), n);
        self.name_list.push(x.clone());
        self.trail.push(Undo::Name(x.clone()));
        n
    }

    fn edge(&self, root: u32, a: Attr) -> Option<u32> {
        self.edges[root as usize]
            .iter()
            .find(|(b, _)| *b == a)
            .map(|&(_, t)| t)
    }

    /// The node for `n a`, created if the class of `n` has no `a` edge.
    pub fn child(&mut self, n: u32, a: Attr) -> Result<u32, Conflict> {
        let root = self.find(n);
        if let Some(t) = self.edge(root, a) {
            return Ok(t);
        }
        let t = self.new_node(Origin::Child(n, a));
        self.edges[root as usize].push((a, t));
        self.trail.push(Undo::Edge(root));
        if self.value[root as usize].is_some() {
            return Err(Conflict::Atomicity(root));
        }
        Ok(t)
    }

    pub fn term(&mut self, x: &TreeAddress, path: &[Attr]) -> Result<u32, Conflict> {
        let mut n = self.name_node(x);
        for &a in path {
            n = self.child(n, a)?;
        }
        Ok(n)
    }

    pub fn assign(&mut self, n: u32, v: Value) -> Result<(), Conflict> {
        if let Some(&c) = self.value_nodes.get(&v) {
            return self.union(n, c);
        }
        let root = self.find(n);
        match self.value[root as usize] {
            Some(w) if w != v => return Err(Conflict::Clash(n, w, v)),
            Some(_) => {}
            None => {
                self.value[root as usize] = Some(v);
                self.trail.push(Undo::SetValue(root));
                if !self.edges[root as usize].is_empty() {
                    return Err(Conflict::Atomicity(root));
                }
            }
        }
        self.value_nodes.insert(v, n);
        self.trail.push(Undo::ValueNode(v));
        Ok(())
    }

    pub fn union(&mut self, a: u32, b: u32) -> Result<(), Conflict> {
        let mut pending = vec![(a, b)];
        while let Some((a, b)) = pending.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            let (root, child) = if self.rank[ra as usize] >= self.rank[rb as usize] {
                (ra, rb)
            } else {
                (rb, ra)
            };
            let rank_bumped = self.rank[root as usize] == self.rank[child as usize];
            if rank_bumped {
                self.rank[root as usize] += 1;
            }
            self.parent[child as usize] = root;
            let edges_len = self.edges[root as usize].len();
            let value_was = self.value[root as usize];
            self.trail.push(Undo::Union {
                child,
                root,
                rank_bumped,
                edges_len,
                value_was,
            });
            for i in 0..self.edges[child as usize].len() {
                let (attr, t) = self.edges[child as usize][i];
                match self.edge(root, attr) {
                    Some(u) => pending.push((t, u)),
                    None => self.edges[root as usize].push((attr, t)),
                }
            }
            match (value_was, self.value[child as usize]) {
                (Some(v), Some(w)) if v != w => return Err(Conflict::Clash(child, v, w)),
                (None, Some(w)) => self.value[root as usize] = Some(w),
                _ => {}
            }
            if self.value[root as usize].is_some() && !self.edges[root as usize].is_empty() {
                return Err(Conflict::Atomicity(root));
            }
        }
        Ok(())
    }

    /// The term that created node `n`.
    pub fn term_of(&self, mut n: u32) -> PathTerm {
        let mut path = Vec::new();
        loop {
            match self.origin[n as usize] {
                Origin::Name(i) => {
                    path.reverse();
                    return PathTerm {
                        name: self.name_list[i as usize].clone(),
                        path,
                    };
                }
                Origin::Child(p, a) => {
                    path.push(a);
                    n = p;
                }
            }
        }
    }

    /// Roots in order of their smallest member.
    fn class_order(&self) -> (Vec<u32>, Vec<Option<usize>>) {
        let mut index = vec![None; self.len()];
        let mut roots = Vec::new();
        for n in 0..self.len() as u32 {
            let r = self.find(n) as usize;
            if index[r].is_none() {
                index[r] = Some(roots.len());
                roots.push(r as u32);
            }
        }
        (roots, index)
    }

    /// Finds an attribute cycle among the classes: a member of the class
    /// where it starts and the attributes along it.
    pub fn cycle(&self) -> Option<(u32, Vec<Attr>)> {
        let (roots, index) = self.class_order();
        let m = self.model_with(&roots, &index);
        m.well_defined_check()
            .cycle
            .map(|(q, path)| (roots[q], path))
    }

    /// The classes as a feature structure: one node per class, numbered by
    /// smallest member.
    pub fn model(&self) -> FeatureStructure {
        let (roots, index) = self.class_order();
        self.model_with(&roots, &index)
    }

    fn model_with(&self, roots: &[u32], index: &[Option<usize>]) -> FeatureStructure {
        let mut m = FeatureStructure::new();
        for _ in roots {
            m.add_node();
        }
        let class = |n: u32| index[self.find(n) as usize].unwrap();
        for (i, &r) in roots.iter().enumerate() {
            for &(a, t) in &self.edges[r as usize] {
                m.set_edge(i, a, class(t));
            }
            if let Some(v) = self.value[r as usize] {
                m.set_value(i, v);
            }
        }
        for (x, &n) in &self.names {
            m.set_name(x.clone(), class(n));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undo_restores_everything() {
        let x: TreeAddress = "1".parse().unwrap();
        let y: TreeAddress = "2".parse().unwrap();
        let mut c = Closure::new();
        let nx = c.term(&x, &[Attr(0)]).unwrap();
        let mark = c.mark();
        let ny = c.term(&y, &[Attr(0)]).unwrap();
        c.assign(nx, Value(0)).unwrap();
        let px = c.name_node(&x);
        let py = c.name_node(&y);
        c.union(px, py).unwrap();
        assert_eq!(c.find(nx), c.find(ny));
        assert!(c.assign(ny, Value(1)).is_err());
        c.undo_to(mark);
        assert_eq!(c.len(), 2);
        assert!(c.value[c.find(nx) as usize].is_none());
        assert!(c.assign(nx, Value(1)).is_ok());
    }

    #[test]
    fn congruence_merges_successors() {
        let x: TreeAddress = "1".parse().unwrap();
        let y: TreeAddress = "2".parse().unwrap();
        let mut c = Closure::new();
        let a = c.term(&x, &[Attr(0), Attr(1)]).unwrap();
        let b = c.term(&y, &[Attr(0), Attr(1)]).unwrap();
        let (px, py) = (c.name_node(&x), c.name_node(&y));
        c.union(px, py).unwrap();
        assert_eq!(c.find(a), c.find(b));
        assert_eq!(c.model().node_count(), 3);
    }
}
