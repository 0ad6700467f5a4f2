use super::FormatError;
use crate::symbol::{Attr, Nt, SymbolSet, Term, Value};
use crate::unification::{Arrow, Daughter, EqSchema, LexRule, Schema, UProduction, UnificationGrammar};

const HEADERS: [&str; 5] = ["nonterminals", "terminals", "attributes", "values", "start"];
const KEYWORDS: [&str; 6] = ["up", "dn", "rule", "lex", "->", "_"];
const PUNCT: [char; 4] = ['{', '}', ';', '='];

fn reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || name.contains(PUNCT)
}

/// Splits a line into tokens; braces, `;` and `=` are tokens of their own.
fn tokenize(line: &str) -> Vec<String> {
    let line = match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    };
    let mut spaced = String::with_capacity(line.len());
    for c in line.chars() {
        if PUNCT.contains(&c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(String::from).collect()
}

struct Tables {
    n: SymbolSet,
    t: SymbolSet,
    a: SymbolSet,
    v: SymbolSet,
}

/// Parses the `.ugr` format.
///
/// ```text
/// nonterminals S A
/// terminals a
/// attributes next idx
/// values $ f
/// start S
/// rule S -> A { dn next = up ; dn idx = $ }
/// rule A -> A { up = dn } A { up = dn }
/// lex A -> a { }
/// lex A -> _ { }
/// ```
pub fn parse_unification_grammar(text: &str) -> Result<UnificationGrammar, FormatError> {
    let lines: Vec<(usize, Vec<String>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, tokenize(l)))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut sets: [Option<SymbolSet>; 4] = [None, None, None, None];
    let mut start: Option<(usize, &str)> = None;
    for (line, tokens) in &lines {
        let head = tokens[0].as_str();
        if head == "rule" || head == "lex" {
            continue;
        }
        let Some(k) = HEADERS.iter().position(|h| *h == head) else {
            return Err(FormatError::new(
                *line,
                format!("expected a header, `rule` or `lex`, found `{head}`"),
            ));
        };
        if k == 4 {
            if tokens.len() != 2 {
                return Err(FormatError::new(*line, "`start` takes exactly one symbol"));
            }
            if start.is_some() {
                return Err(FormatError::new(*line, "duplicate `start` header"));
            }
            start = Some((*line, tokens[1].as_str()));
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
            // nonterminals and terminals must be disjoint; attributes and
            // values live in their own name spaces
            if k < 2 {
                let other = 1 - k;
                if sets[other].as_ref().is_some_and(|o| o.contains(name)) {
                    return Err(FormatError::new(
                        *line,
                        format!(
                            "`{name}` is declared in both `{}` and `{}`: the classes must be disjoint",
                            HEADERS[other], HEADERS[k]
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
    let [n, t, a, v] = sets;
    let missing = |h: &str| FormatError::new(0, format!("missing `{h}` header"));
    let tables = Tables {
        n: n.ok_or_else(|| missing("nonterminals"))?,
        t: t.ok_or_else(|| missing("terminals"))?,
        a: a.ok_or_else(|| missing("attributes"))?,
        v: v.ok_or_else(|| missing("values"))?,
    };
    let (start_line, start) = start.ok_or_else(|| missing("start"))?;
    let start = tables.n.get(start).map(Nt).ok_or_else(|| {
        FormatError::new(start_line, format!("start symbol `{start}` is not a nonterminal"))
    })?;

    let mut productions = Vec::new();
    let mut lexicon = Vec::new();
    for (line, tokens) in &lines {
        let tokens: Vec<&str> = tokens.iter().map(String::as_str).collect();
        match tokens[0] {
            "rule" => productions.push(parse_production(*line, &tokens[1..], &tables)?),
            "lex" => lexicon.push(parse_lex(*line, &tokens[1..], &tables)?),
            _ => {}
        }
    }
    let Tables { n, t, a, v } = tables;
    UnificationGrammar::new(n, t, a, v, productions, lexicon, start)
        .map_err(|e| FormatError::new(0, e.to_string()))
}

fn nt(line: usize, name: &str, tables: &Tables) -> Result<Nt, FormatError> {
    tables
        .n
        .get(name)
        .map(Nt)
        .ok_or_else(|| FormatError::new(line, format!("undeclared nonterminal `{name}`")))
}

/// Splits `A -> rest` and returns `A` and `rest`.
fn split_arrow<'a>(line: usize, tokens: &'a [&'a str]) -> Result<(&'a str, &'a [&'a str]), FormatError> {
    match tokens {
        [a, "->", rest @ ..] => Ok((a, rest)),
        _ => Err(FormatError::new(line, "expected `A -> ...`")),
    }
}

/// Reads `{ ... }` at the front of `tokens`, returning the schema and the
/// remaining tokens.
fn parse_schema<'a>(
    line: usize,
    tokens: &'a [&'a str],
    tables: &Tables,
) -> Result<(Schema, &'a [&'a str]), FormatError> {
    let err = |m: String| FormatError::new(line, m);
    if tokens.first() != Some(&"{") {
        return Err(err("expected `{` to open a schema".into()));
    }
    let close = tokens
        .iter()
        .position(|t| *t == "}")
        .ok_or_else(|| err("unclosed `{`".into()))?;
    let body = &tokens[1..close];
    let mut schema = Schema::new();
    for eq in body.split(|t| *t == ";") {
        if eq.is_empty() {
            continue;
        }
        schema.insert(parse_equation(line, eq, tables)?);
    }
    Ok((schema, &tokens[close + 1..]))
}

fn parse_side(line: usize, tokens: &[&str], tables: &Tables) -> Result<(Arrow, Vec<Attr>), FormatError> {
    let arrow = match tokens.first() {
        Some(&"up") => Arrow::Up,
        Some(&"dn") => Arrow::Down,
        _ => return Err(FormatError::new(line, "an equation side starts with `up` or `dn`")),
    };
    let path = tokens[1..]
        .iter()
        .map(|a| {
            tables
                .a
                .get(a)
                .map(Attr)
                .ok_or_else(|| FormatError::new(line, format!("undeclared attribute `{a}`")))
        })
        .collect::<Result<_, _>>()?;
    Ok((arrow, path))
}

fn parse_equation(line: usize, tokens: &[&str], tables: &Tables) -> Result<EqSchema, FormatError> {
    let err = |m: &str| FormatError::new(line, m);
    let eq = tokens
        .iter()
        .position(|t| *t == "=")
        .ok_or_else(|| err("an equation needs `=`"))?;
    let (lhs, rhs) = (&tokens[..eq], &tokens[eq + 1..]);
    if rhs.contains(&"=") {
        return Err(err("more than one `=` in an equation"));
    }
    let (s1, p1) = parse_side(line, lhs, tables)?;
    match rhs {
        [] => Err(err("missing right-hand side of `=`")),
        [first, ..] if *first == "up" || *first == "dn" => {
            let (s2, p2) = parse_side(line, rhs, tables)?;
            Ok(EqSchema::Path { s1, p1, s2, p2 })
        }
        [value] => {
            let value = tables
                .v
                .get(value)
                .map(Value)
                .ok_or_else(|| FormatError::new(line, format!("undeclared value `{value}`")))?;
            if p1.is_empty() {
                return Err(err("a value equation needs a non-empty attribute path"));
            }
            Ok(EqSchema::Val {
                side: s1,
                path: p1,
                value,
            })
        }
        _ => Err(err("the right-hand side is a side (`up ...`, `dn ...`) or one value")),
    }
}

fn parse_production(line: usize, tokens: &[&str], tables: &Tables) -> Result<UProduction, FormatError> {
    let (mother, mut rest) = split_arrow(line, tokens)?;
    let mother = nt(line, mother, tables)?;
    let mut daughters = Vec::new();
    while let Some((name, after)) = rest.split_first() {
        let category = nt(line, name, tables)?;
        let (schema, after) = parse_schema(line, after, tables)?;
        daughters.push(Daughter { category, schema });
        rest = after;
    }
    if daughters.is_empty() {
        return Err(FormatError::new(line, "a production needs at least one daughter"));
    }
    Ok(UProduction { mother, daughters })
}

fn parse_lex(line: usize, tokens: &[&str], tables: &Tables) -> Result<LexRule, FormatError> {
    let (mother, rest) = split_arrow(line, tokens)?;
    let mother = nt(line, mother, tables)?;
    let Some((word, rest)) = rest.split_first() else {
        return Err(FormatError::new(line, "a lexicon rule needs a terminal or `_`"));
    };
    let word = match *word {
        "_" => None,
        w => Some(
            tables
                .t
                .get(w)
                .map(Term)
                .ok_or_else(|| FormatError::new(line, format!("undeclared terminal `{w}`")))?,
        ),
    };
    let (schema, rest) = parse_schema(line, rest, tables)?;
    if !rest.is_empty() {
        return Err(FormatError::new(line, "a lexicon rule has exactly one right-hand symbol"));
    }
    if schema.iter().any(|e| matches!(e, EqSchema::Path { .. })) {
        return Err(FormatError::new(line, "lexicon rules may only carry value equations"));
    }
    Ok(LexRule { mother, word, schema })
}

/// Prints the canonical `.ugr` form; parsing it gives back an equal grammar.
pub fn print_unification_grammar(g: &UnificationGrammar) -> String {
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
    header(&mut out, "attributes", g.attributes());
    header(&mut out, "values", g.values());
    out.push_str(&format!("start {}\n\n", g.nt_name(g.start())));
    for p in g.productions() {
        out.push_str(&g.display_production(p));
        out.push('\n');
    }
    for l in g.lexicon() {
        out.push_str(&g.display_lex(l));
        out.push('\n');
    }
    out
}
