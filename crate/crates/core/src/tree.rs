//! Tree addresses and tree domains.
//!
//! A tree address is a string of positive integers naming a node: the empty
//! string is the root and `x·i` is the `i`-th child of `x`. The derived `Ord`
//! on the digit vector is exactly the lexicographic order used to read off
//! terminal strings: a prefix precedes its extensions, otherwise the first
//! differing digit decides.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeAddress(Vec<u32>);

impl TreeAddress {
    pub fn root() -> Self {
        TreeAddress(Vec::new())
    }

    /// Builds an address from its digits. Zero digits are rejected.
    pub fn from_digits(digits: impl IntoIterator<Item = u32>) -> Result<Self, DomainError> {
        let digits: Vec<u32> = digits.into_iter().collect();
        if digits.iter().any(|&d| d == 0) {
            return Err(DomainError::ZeroDigit);
        }
        Ok(TreeAddress(digits))
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// The `i`-th child (1-based).
    pub fn child(&self, i: u32) -> Self {
        assert!(i >= 1, "child numbers start at 1");
        let mut digits = self.0.clone();
        digits.push(i);
        TreeAddress(digits)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(TreeAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last_digit(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn is_prefix_of(&self, other: &TreeAddress) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for TreeAddress {
    /// The root prints as `ε`; other addresses print their digits, separated
    /// by dots when any digit has more than one decimal place.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let sep = if self.0.iter().any(|&d| d > 9) { "." } else { "" };
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(sep))
    }
}

impl fmt::Debug for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{self}")
    }
}

impl FromStr for TreeAddress {
    type Err = DomainError;

    /// Accepts `ε` (or the empty string) for the root, dotted digits
    /// (`1.10.2`), or undotted single digits (`112`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "eps" {
            return Ok(TreeAddress::root());
        }
        let digits: Option<Vec<u32>> = if s.contains('.') {
            s.split('.').map(|p| p.parse::<u32>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10)).collect()
        };
        let digits = digits.ok_or_else(|| DomainError::Malformed(s.to_string()))?;
        TreeAddress::from_digits(digits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("tree address digits must be positive")]
    ZeroDigit,
    #[error("malformed tree address `{0}`")]
    Malformed(String),
    #[error("tree domain is empty")]
    Empty,
    #[error("address {0} is present but its prefix {1} is not")]
    NotPrefixClosed(TreeAddress, TreeAddress),
    #[error("address {0} is present but its left sibling {1} is not")]
    NotSiblingClosed(TreeAddress, TreeAddress),
}

/// A finite, prefix-closed and left-sibling-closed set of addresses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDomain {
    addrs: BTreeSet<TreeAddress>,
}

impl TreeDomain {
    pub fn new(addrs: impl IntoIterator<Item = TreeAddress>) -> Result<Self, DomainError> {
        let addrs: BTreeSet<TreeAddress> = addrs.into_iter().collect();
        if addrs.is_empty() {
            return Err(DomainError::Empty);
        }
        for x in &addrs {
            let Some(p) = x.parent() else { continue };
            if !addrs.contains(&p) {
                return Err(DomainError::NotPrefixClosed(x.clone(), p));
            }
            let last = x.last_digit().unwrap();
            if last > 1 {
                let left = p.child(last - 1);
                if !addrs.contains(&left) {
                    return Err(DomainError::NotSiblingClosed(x.clone(), left));
                }
            }
        }
        Ok(TreeDomain { addrs })
    }

    pub fn len(&self) -> usize {
        self.addrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addrs.is_empty()
    }

    pub fn contains(&self, x: &TreeAddress) -> bool {
        self.addrs.contains(x)
    }

    /// Addresses in `≺` order (preorder).
    pub fn iter(&self) -> impl Iterator<Item = &TreeAddress> {
        self.addrs.iter()
    }

    /// Out degree `d(x)`: number of children of `x`.
    pub fn out_degree(&self, x: &TreeAddress) -> usize {
        let mut n = 0u32;
        while self.addrs.contains(&x.child(n + 1)) {
            n += 1;
        }
        n as usize
    }

    /// `term(D)`, the leaves, in `≺` order.
    pub fn term(&self) -> Vec<&TreeAddress> {
        self.addrs
            .iter()
            .filter(|x| !self.addrs.contains(&x.child(1)))
            .collect()
    }

    /// Length of the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.addrs.iter().map(TreeAddress::depth).max().unwrap_or(0)
    }
}
