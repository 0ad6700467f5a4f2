//! Interned identifier sets.
//!
//! Grammars refer to their symbols through small integer ids; each symbol
//! class owns a [`SymbolSet`] mapping ids back to names. Ids follow
//! declaration order.

use std::collections::HashMap;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// A nonterminal symbol.
    Nt
);
id_type!(
    /// A terminal symbol.
    Term
);
id_type!(
    /// An index symbol of an indexed grammar.
    Ix
);
id_type!(
    /// A feature attribute.
    Attr
);
id_type!(
    /// An atomic feature value.
    Value
);

/// An ordered set of distinct names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolSet {
    names: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl SymbolSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `name`, returning its id. Existing names keep their id.
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl<S: AsRef<str>> FromIterator<S> for SymbolSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut set = SymbolSet::new();
        for s in iter {
            set.intern(s.as_ref());
        }
        set
    }
}

/// True for identifiers usable in the text formats: non-empty, no whitespace.
pub fn valid_identifier(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(char::is_whitespace)
}

/// Returns `base` if `taken` rejects nothing, else `base_1`, `base_2`, ...
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|cand| !taken(cand))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let mut s = SymbolSet::new();
        assert_eq!(s.intern("S"), 0);
        assert_eq!(s.intern("A"), 1);
        assert_eq!(s.intern("S"), 0);
        assert_eq!(s.name(1), "A");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn fresh_names_suffix() {
        let taken = ["S_0", "S_0_1"];
        assert_eq!(fresh_name("S_0", |n| taken.contains(&n)), "S_0_2");
        assert_eq!(fresh_name("X", |n| taken.contains(&n)), "X");
    }
}
