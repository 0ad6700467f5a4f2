//! A laboratory for indexed grammars and simple unification grammars.
//!
//! The crate represents both grammar formalisms, searches their derivations
//! under explicit budgets, and implements the transformations between them:
//! marking the index end, the indexed-to-unification translation and its
//! inverse, normalization of unification grammars for indexed languages, and
//! sink-mapping their root. Bounded language comparison shows that each
//! transformation keeps the generated language.

pub mod budget;
pub mod dot;
pub mod feature;
pub mod format;
pub mod fuzz;
pub mod indexed;
pub mod lang;
pub mod symbol;
pub mod transforms;
pub mod tree;
pub mod unification;

#[cfg(test)]
mod testdata;

pub use budget::{Budget, SearchStats};

use thiserror::Error;

/// A word that mentions symbols outside the grammar's terminal set.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("`{0}` is not a terminal of the grammar")]
    UnknownTerminal(String),
    #[error("cannot split `{0}` into terminals")]
    Unsplittable(String),
}
