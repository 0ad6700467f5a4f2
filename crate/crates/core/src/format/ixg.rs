use super::{token_lines, FormatError};
use crate::indexed::{IndexedGrammar, IndexedProduction, Symbol};
use crate::symbol::{Ix, Nt, SymbolSet, Term};

const HEADERS: [&str; 4] = ["nonterminals", "terminals", "indices", "start"];

fn reserved(name: &str) -> bool {
    name == "_" || name == "->" || name.starts_with('^')
}

/// Parses the `.ixg` format.
///
/// ```text
/// nonterminals S A
/// terminals a
/// indices f
/// start S
/// S -> A ^f       # push
/// A ^f -> a A     # pop
/// A -> _          # plain, ε written `_`
/// ```
pub fn parse_indexed_grammar(text: &str) -> Result<IndexedGrammar, FormatError> {
    let lines: Vec<(usize, Vec<&str>)> = token_lines(text).collect();
    let mut sets: [Option<SymbolSet>; 3] = [None, None, None];
    let mut start: Option<(usize, &str)> = None;
    for (line, tokens) in &lines {
        if tokens.contains(&"->") {
            continue;
        }
        let Some(k) = HEADERS.iter().position(|h| *h == tokens[0]) else {
            return Err(FormatError::new(
                *line,
                format!("expected a header or a rule, found `{}`", tokens[0]),
            ));
        };
        if k == 3 {
            if tokens.len() != 2 {
                return Err(FormatError::new(*line, "`start` takes exactly one symbol"));
            }
            if start.is_some() {
                return Err(FormatError::new(*line, "duplicate `start` header"));
            }
            start = Some((*line, tokens[1]));
            continue;
        }
        if sets[k].is_some() {
            return Err(FormatError::new(*line, format!("duplicate `{}` header", HEADERS[k])));
        }
        let mut set = SymbolSet::new();
        for name in &tokens[1..] {
            if reserved(name) {
                return Err(FormatError::new(*line, format!("`{name}` cannot be used as a symbol")));
            }
            for (j, other) in sets.iter().enumerate() {
                if other.as_ref().is_some_and(|o| o.contains(name)) {
                    return Err(FormatError::new(
                        *line,
                        format!(
                            "`{name}` is declared in both `{}` and `{}`: the classes must be disjoint",
                            HEADERS[j], HEADERS[k]
                        ),
                    ));
                }
            }
            if set.contains(name) {
                return Err(FormatError::new(*line, format!("`{name}` is declared twice")));
            }
            set.intern(name);
        }
        sets[k] = Some(set);
    }
    let [n, t, i] = sets;
    let missing = |h: &str| FormatError::new(0, format!("missing `{h}` header"));
    let n = n.ok_or_else(|| missing("nonterminals"))?;
    let t = t.ok_or_else(|| missing("terminals"))?;
    let i = i.ok_or_else(|| missing("indices"))?;
    let (start_line, start) = start.ok_or_else(|| missing("start"))?;
    let start = n
        .get(start)
        .map(Nt)
        .ok_or_else(|| FormatError::new(start_line, format!("start symbol `{start}` is not a nonterminal")))?;

    let mut productions = Vec::new();
    for (line, tokens) in &lines {
        if tokens.contains(&"->") {
            productions.push(parse_rule(*line, tokens, &n, &t, &i)?);
        }
    }
    IndexedGrammar::new(n, t, i, productions, start).map_err(|e| FormatError::new(0, e.to_string()))
}

fn parse_rule(
    line: usize,
    tokens: &[&str],
    n: &SymbolSet,
    t: &SymbolSet,
    i: &SymbolSet,
) -> Result<IndexedProduction, FormatError> {
    let err = |m: String| FormatError::new(line, m);
    let nt = |name: &str| {
        n.get(name)
            .map(Nt)
            .ok_or_else(|| err(format!("undeclared nonterminal `{name}`")))
    };
    let index = |tok: &str| {
        let name = tok.strip_prefix('^').unwrap_or(tok);
        i.get(name)
            .map(Ix)
            .ok_or_else(|| err(format!("undeclared index `{name}`")))
    };
    let arrow = tokens.iter().position(|t| *t == "->").unwrap();
    let (lhs, rhs) = (&tokens[..arrow], &tokens[arrow + 1..]);
    if rhs.contains(&"->") {
        return Err(err("more than one `->`".into()));
    }
    let (lhs, pop) = match lhs {
        [a] => (nt(a)?, None),
        [a, f] if f.starts_with('^') => (nt(a)?, Some(index(f)?)),
        _ => return Err(err("left-hand side must be `A` or `A ^f`".into())),
    };
    if let Some(last) = rhs.last().filter(|t| t.starts_with('^')) {
        let [b, _] = rhs else {
            return Err(err("a push rule has exactly one nonterminal before `^f`".into()));
        };
        if pop.is_some() {
            return Err(err("a rule cannot both pop and push".into()));
        }
        return Ok(IndexedProduction::Push {
            lhs,
            rhs: nt(b)?,
            index: index(last)?,
        });
    }
    let daughters = match rhs {
        [] => return Err(err("empty right-hand side; write `_` for ε".into())),
        ["_"] => Vec::new(),
        _ => rhs
            .iter()
            .map(|s| {
                if *s == "_" {
                    Err(err("`_` must stand alone".into()))
                } else if s.starts_with('^') {
                    Err(err(format!("misplaced index `{s}`")))
                } else if let Some(x) = n.get(s) {
                    Ok(Symbol::N(Nt(x)))
                } else if let Some(x) = t.get(s) {
                    Ok(Symbol::T(Term(x)))
                } else {
                    Err(err(format!("undeclared symbol `{s}`")))
                }
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(match pop {
        Some(index) => IndexedProduction::Pop {
            lhs,
            index,
            rhs: daughters,
        },
        None => IndexedProduction::Plain {
            lhs,
            rhs: daughters,
        },
    })
}

/// Prints the canonical `.ixg` form; parsing it gives back an equal grammar.
pub fn print_indexed_grammar(g: &IndexedGrammar) -> String {
    let mut out = String::new();
    let header = |out: &mut String, name: &str, set: &SymbolSet| {
        out.push_str(name);
        for s in set.names() {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
    };
    header(&mut out, "nonterminals", g.nonterminals());
    header(&mut out, "terminals", g.terminals());
    header(&mut out, "indices", g.indices());
    out.push_str(&format!("start {}\n\n", g.nt_name(g.start())));
    for p in g.productions() {
        out.push_str(&g.display_production(p));
        out.push('\n');
    }
    out
}
