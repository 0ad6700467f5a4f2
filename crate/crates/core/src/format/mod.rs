//! Line-oriented text formats: `.ixg` for indexed grammars and `.ugr` for
//! simple unification grammars.
//!
//! Both formats start with header lines declaring the symbol classes and the
//! start symbol, followed by one rule per line. `#` starts a comment. Tokens
//! are separated by whitespace.

mod ixg;
mod ugr;

pub use ixg::{parse_indexed_grammar, print_indexed_grammar};
pub use ugr::{parse_unification_grammar, print_unification_grammar};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based; 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

/// Strips comments and yields `(line number, tokens)` for non-blank lines.
pub(crate) fn token_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

/// Writes `# key: value` comment lines, used to carry metadata such as rule
/// correspondences alongside a grammar.
pub fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}
