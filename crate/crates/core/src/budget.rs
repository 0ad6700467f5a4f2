//! Search budgets shared by the bounded enumeration procedures.

/// Limits for a bounded search.
///
/// `max_nodes` bounds the size `|D|` of every tree considered; `max_trees`
/// bounds the number of (partial) trees the search may build in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_trees: usize,
}

impl Budget {
    pub const DEFAULT_MAX_NODES: usize = 4096;
    pub const DEFAULT_MAX_TREES: usize = 1_000_000;

    pub fn new(max_nodes: usize, max_trees: usize) -> Self {
        Budget {
            max_nodes,
            max_trees,
        }
    }

    pub fn with_max_nodes(self, max_nodes: usize) -> Self {
        Budget { max_nodes, ..self }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_MAX_NODES, Self::DEFAULT_MAX_TREES)
    }
}

/// What a bounded search actually covered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Partial trees built.
    pub steps: usize,
    /// The `max_trees` budget ran out before the search finished.
    pub exhausted: bool,
    /// Some tree was cut off by the node bound, so larger trees exist that
    /// were not examined.
    pub truncated: bool,
    /// Every tree with at most this many nodes was examined.
    pub complete_nodes: usize,
}

impl SearchStats {
    /// True when the search covered all trees, not only those within the
    /// node bound.
    pub fn is_exhaustive(&self) -> bool {
        !self.exhausted && !self.truncated
    }
}

/// Node bounds for iterative deepening: every size from 4 to 32, then
/// doubling, capped at `max_nodes`. The number of trees grows exponentially
/// with the bound, so small steps keep the level that holds the smallest
/// witness cheap.
pub(crate) fn deepening_bounds(max_nodes: usize) -> Vec<usize> {
    let mut bounds = Vec::new();
    let mut b = 4usize;
    while b < max_nodes {
        bounds.push(b);
        b = if b < 32 { b + 1 } else { b * 2 };
    }
    bounds.push(max_nodes);
    bounds
}

/// Saturating "infinity" for lower bounds over unproductive symbols.
pub(crate) const UNREACHABLE: usize = usize::MAX / 8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_step_then_double() {
        assert_eq!(deepening_bounds(100)[..3], [4, 5, 6]);
        assert_eq!(deepening_bounds(100)[28..], [32, 64, 100]);
        assert_eq!(deepening_bounds(16).len(), 13);
        assert_eq!(deepening_bounds(5), vec![4, 5]);
        assert_eq!(deepening_bounds(3), vec![3]);
    }
}
