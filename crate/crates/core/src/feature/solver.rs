//! Deciding consistency of equation sets by building their least model.

use std::collections::BTreeSet;

use super::closure::{Closure, Conflict};
use super::{Equation, EquationError, FeatureStructure, PathTerm};
use crate::symbol::{Attr, Value};
use crate::tree::TreeAddress;

/// Why an equation set has no well-defined model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnosis {
    /// The term is forced to carry both values.
    ValueClash(PathTerm, Value, Value),
    /// The term is forced to carry a value and to have an out-edge.
    AtomicityViolation(PathTerm),
    /// Following the path from the term leads back to it.
    CycleDetected(PathTerm, Vec<Attr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Consistent(FeatureStructure),
    Inconsistent(Diagnosis),
}

impl SolveResult {
    pub fn is_consistent(&self) -> bool {
        matches!(self, SolveResult::Consistent(_))
    }

    pub fn model(&self) -> Option<&FeatureStructure> {
        match self {
            SolveResult::Consistent(m) => Some(m),
            SolveResult::Inconsistent(_) => None,
        }
    }
}

/// Adds one equation to the closure.
pub(crate) fn assert_equation(c: &mut Closure, e: &Equation) -> Result<(), Conflict> {
    match e {
        Equation::PathEq { x1, p1, x2, p2 } => {
            let l = c.term(x1, p1)?;
            let r = c.term(x2, p2)?;
            c.union(l, r)
        }
        Equation::ValEq { x, path, value } => {
            let n = c.term(x, path)?;
            c.assign(n, *value)
        }
    }
}

pub(crate) fn diagnose(c: &Closure, conflict: Conflict) -> Diagnosis {
    match conflict {
        Conflict::Clash(n, v, w) => {
            let (v, w) = if v <= w { (v, w) } else { (w, v) };
            Diagnosis::ValueClash(c.term_of(n), v, w)
        }
        Conflict::Atomicity(n) => Diagnosis::AtomicityViolation(c.term_of(n)),
    }
}

/// Builds the least model of `es` over `name_domain`: one node per
/// congruence class of the terms occurring in `es` (with their prefixes) and
/// of the names. Reports a value clash, an atom with an out-edge, or an
/// attribute cycle when no well-defined model exists.
///
/// Nodes are numbered by first occurrence, equations taken in sorted order
/// and remaining names in address order.
pub fn solve(
    es: &BTreeSet<Equation>,
    name_domain: &BTreeSet<TreeAddress>,
) -> Result<SolveResult, EquationError> {
    for e in es {
        for x in e.names() {
            if !name_domain.contains(x) {
                return Err(EquationError::UnknownName(x.clone()));
            }
        }
    }
    let mut c = Closure::new();
    for e in es {
        if let Err(conflict) = assert_equation(&mut c, e) {
            return Ok(SolveResult::Inconsistent(diagnose(&c, conflict)));
        }
    }
    for x in name_domain {
        c.name_node(x);
    }
    if let Some((n, path)) = c.cycle() {
        return Ok(SolveResult::Inconsistent(Diagnosis::CycleDetected(
            c.term_of(n),
            path,
        )));
    }
    Ok(SolveResult::Consistent(c.model()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> TreeAddress {
        s.parse().unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<TreeAddress> {
        xs.iter().map(|x| a(x)).collect()
    }

    const NEXT: Attr = Attr(0);
    const IDX: Attr = Attr(1);

    #[test]
    fn two_values_clash() {
        let es = BTreeSet::from([
            Equation::val_eq(a("1"), vec![IDX], Value(0)).unwrap(),
            Equation::val_eq(a("1"), vec![IDX], Value(1)).unwrap(),
        ]);
        let r = solve(&es, &names(&["1"])).unwrap();
        assert!(matches!(
            r,
            SolveResult::Inconsistent(Diagnosis::ValueClash(_, Value(0), Value(1)))
        ));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let es = BTreeSet::from([Equation::path_eq(a("1"), vec![NEXT], a("1"), vec![])]);
        let r = solve(&es, &names(&["1"])).unwrap();
        let SolveResult::Inconsistent(Diagnosis::CycleDetected(t, path)) = r else {
            panic!("expected a cycle, got {r:?}");
        };
        assert_eq!(t.name, a("1"));
        assert_eq!(path, vec![NEXT]);
    }

    #[test]
    fn equated_names_share_a_class() {
        let es = BTreeSet::from([
            Equation::path_eq(a("1"), vec![], a("2"), vec![]),
            Equation::val_eq(a("1"), vec![Attr(2)], Value(0)).unwrap(),
        ]);
        let r = solve(&es, &names(&["1", "2"])).unwrap();
        let m = r.model().unwrap();
        assert_eq!(m.node_count(), 2);
        let q = m.name(&a("1")).unwrap();
        assert_eq!(m.name(&a("2")), Some(q));
        assert_eq!(m.alpha(m.delta(q, Attr(2)).unwrap()), Some(Value(0)));
        assert!(m.well_defined_check().is_well_defined());
        assert!(m.satisfies_set(&es).unwrap());
    }

    #[test]
    fn value_with_edge_violates_atomicity() {
        let es = BTreeSet::from([
            Equation::val_eq(a("1"), vec![IDX], Value(0)).unwrap(),
            Equation::path_eq(a("1"), vec![IDX, NEXT], a("2"), vec![]),
        ]);
        let r = solve(&es, &names(&["1", "2"])).unwrap();
        assert!(matches!(
            r,
            SolveResult::Inconsistent(Diagnosis::AtomicityViolation(_))
        ));
    }

    #[test]
    fn same_value_terms_share_a_node() {
        let es = BTreeSet::from([
            Equation::val_eq(a("1"), vec![IDX], Value(0)).unwrap(),
            Equation::val_eq(a("2"), vec![IDX], Value(0)).unwrap(),
        ]);
        let m = solve(&es, &names(&["1", "2"])).unwrap();
        assert_eq!(m.model().unwrap().node_count(), 3);
    }

    #[test]
    fn empty_set_gives_isolated_names() {
        let m = solve(&BTreeSet::new(), &names(&["ε", "1"])).unwrap();
        let m = m.model().unwrap();
        assert_eq!(m.node_count(), 2);
        assert!(m.edges().is_empty());
    }

    #[test]
    fn unknown_name_is_an_error() {
        let es = BTreeSet::from([Equation::path_eq(a("1"), vec![], a("3"), vec![])]);
        assert!(solve(&es, &names(&["1"])).is_err());
    }
}
