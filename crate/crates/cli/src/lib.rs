//! The `glab` command line: checking, membership, enumeration,
//! transformation, and comparison of indexed and unification grammars.
//!
//! Exit codes: 0 success, member, or agreement; 1 usage, parse, or
//! precondition error; 2 no witness within budget or disagreement.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use glab_core::dot::{cstructure_dot, derivation_dot, feature_dot};
use glab_core::feature::FeatureStructure;
use glab_core::format::{comment_block, print_indexed_grammar, print_unification_grammar};
use glab_core::indexed::{indexed_membership, DerivationTree, IndexedGrammar, IxLabel, Membership};
use glab_core::lang::{equivalence, format_word, language_upto, parse_word, AnyGrammar, Method};
use glab_core::symbol::{SymbolSet, Term};
use glab_core::transforms::{reverse_u, u_transform};
use glab_core::unification::{sink_map_root, sug_membership, ugi_check, ugi_normalize, CStructure, UCat, UnificationGrammar};
use glab_core::{Budget, SearchStats};

#[derive(Parser, Debug)]
#[command(name = "glab", version, about = "Indexed and unification grammar laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    /// Largest derivation tree examined, in nodes.
    #[arg(long, default_value_t = Budget::default().max_nodes)]
    max_nodes: usize,
    /// Most partial trees built by a search.
    #[arg(long, default_value_t = Budget::default().max_trees)]
    max_trees: usize,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            max_trees: self.max_trees,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a grammar and report its normal-form properties.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether a word is generated and print a witness.
    Member {
        file: PathBuf,
        /// Terminals, space-separated or run together; `_` for the empty word.
        word: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// List every generated word up to a length.
    Enum {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Apply a grammar transformation.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        /// Output file; standard output when absent.
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Compare the languages of two grammars up to a length.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Render a witness for a word as Graphviz DOT.
    Derive {
        file: PathBuf,
        word: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Op {
    /// Give an indexed grammar a marked index-end.
    MarkEnd,
    /// Indexed grammar to unification grammar.
    U,
    /// UGI grammar back to indexed grammar.
    ReverseU,
    /// Bring a UGI grammar to reduced form.
    UgiNormalize,
    /// Give a UGI grammar a sink-mapped root.
    SinkMap,
}

/// Runs one command, writing to `out` and `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check { file, json } => check(&file, json, out),
        Command::Member { file, word, budget } => member(&file, &word, budget.budget(), out),
        Command::Enum {
            file,
            max_len,
            json,
            budget,
        } => enumerate(&file, max_len, json, budget.budget(), out, err),
        Command::Transform { file, op, o } => transform(&file, op, o.as_deref(), out),
        Command::Equiv {
            left,
            right,
            max_len,
            json,
            budget,
        } => equiv(&left, &right, max_len, json, budget.budget(), out),
        Command::Derive { file, word, dot, budget } => derive(&file, &word, dot.as_deref(), budget.budget(), out),
    }
}

fn load(path: &Path) -> Result<AnyGrammar> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    AnyGrammar::parse(&text, ext).with_context(|| format!("{}", path.display()))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Serialize)]
struct Offender {
    property: String,
    rule: Option<String>,
    reason: String,
}

#[derive(Serialize)]
struct CheckReport {
    file: String,
    kind: &'static str,
    nonterminals: usize,
    terminals: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    indices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attributes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<usize>,
    rules: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    ugi: Option<bool>,
    reduced_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    marked_index_end: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sink_mapped_root: Option<bool>,
    offenders: Vec<Offender>,
}

fn check_indexed(file: String, g: &IndexedGrammar) -> CheckReport {
    let reduced = g.reduced_form_check();
    let marked = g.marked_index_end_check();
    let mut offenders: Vec<Offender> = reduced
        .offenders
        .iter()
        .map(|o| Offender {
            property: "reduced-form".into(),
            rule: Some(format!("rule {} `{}`", o.rule + 1, g.display_production(&g.productions()[o.rule]))),
            reason: o.reason.clone(),
        })
        .collect();
    if !marked {
        offenders.push(Offender {
            property: "marked-index-end".into(),
            rule: None,
            reason: format!(
                "the start symbol `{}` must occur in exactly one rule, which pushes an index found in no other rule",
                g.nt_name(g.start())
            ),
        });
    }
    CheckReport {
        file,
        kind: "indexed",
        nonterminals: g.nonterminals().len(),
        terminals: g.terminals().len(),
        indices: Some(g.indices().len()),
        attributes: None,
        values: None,
        rules: g.productions().len(),
        ugi: None,
        reduced_form: reduced.is_reduced(),
        marked_index_end: Some(marked),
        sink_mapped_root: None,
        offenders,
    }
}

fn check_unification(file: String, g: &UnificationGrammar) -> CheckReport {
    let r = ugi_check(g);
    let offenders = r
        .offenders
        .iter()
        .map(|o| Offender {
            property: o.property.to_string(),
            rule: o.rule.map(|rule| format!("{rule} `{}`", g.display_rule(rule))),
            reason: o.reason.clone(),
        })
        .collect();
    CheckReport {
        file,
        kind: "unification",
        nonterminals: g.nonterminals().len(),
        terminals: g.terminals().len(),
        indices: None,
        attributes: Some(g.attributes().len()),
        values: Some(g.values().len()),
        rules: g.productions().len() + g.lexicon().len(),
        ugi: Some(r.is_ugi),
        reduced_form: r.is_reduced,
        marked_index_end: None,
        sink_mapped_root: Some(r.has_sink_mapped_root),
        offenders,
    }
}

fn check(path: &Path, json: bool, out: &mut dyn Write) -> Result<i32> {
    let g = load(path)?;
    let file = path.display().to_string();
    let report = match &g {
        AnyGrammar::Indexed(g) => check_indexed(file, g),
        AnyGrammar::Unification(g) => check_unification(file, g),
    };
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(0);
    }
    match &g {
        AnyGrammar::Indexed(_) => {
            writeln!(
                out,
                "indexed grammar: {} nonterminals, {} terminals, {} indices, {} rules",
                report.nonterminals,
                report.terminals,
                report.indices.unwrap_or(0),
                report.rules
            )?;
            writeln!(
                out,
                "reduced-form: {}; marked-index-end: {}",
                yes_no(report.reduced_form),
                yes_no(report.marked_index_end == Some(true))
            )?;
        }
        AnyGrammar::Unification(g) => {
            writeln!(
                out,
                "unification grammar: {} nonterminals, {} terminals, {} attributes, {} values, {} productions, {} lexicon rules",
                report.nonterminals,
                report.terminals,
                report.attributes.unwrap_or(0),
                report.values.unwrap_or(0),
                g.productions().len(),
                g.lexicon().len()
            )?;
            writeln!(
                out,
                "ugi: {}; reduced-form: {}; sink-mapped-root: {}",
                yes_no(report.ugi == Some(true)),
                yes_no(report.reduced_form),
                yes_no(report.sink_mapped_root == Some(true))
            )?;
        }
    }
    for o in &report.offenders {
        match &o.rule {
            Some(r) => writeln!(out, "  {}: {r}: {}", o.property, o.reason)?,
            None => writeln!(out, "  {}: {}", o.property, o.reason)?,
        }
    }
    Ok(0)
}

fn word_of(g: &AnyGrammar, text: &str) -> Result<Vec<Term>> {
    Ok(parse_word(g.terminals(), text)?)
}

/// Whether `w` is outside the language for certain, by the exact engine.
fn certainly_absent(g: &AnyGrammar, w: &[Term], budget: Budget) -> bool {
    let l = language_upto(g, w.len(), budget);
    l.is_complete() && !l.words.contains(w)
}

enum Witness {
    Tree(IndexedGrammar, DerivationTree),
    CStructure(UnificationGrammar, CStructure, FeatureStructure),
}

/// `Ok(Err(message))` when there is no witness.
fn find_witness(g: &AnyGrammar, w: &[Term], budget: Budget) -> Result<std::result::Result<Witness, String>> {
    if certainly_absent(g, w, budget) {
        return Ok(Err("no: not in the language".into()));
    }
    let missing = |s: SearchStats| {
        format!(
            "no witness within budget ({} partial trees built, every tree up to {} nodes examined{})",
            s.steps,
            s.complete_nodes,
            if s.exhausted { ", tree budget exhausted" } else { "" }
        )
    };
    Ok(match g {
        AnyGrammar::Indexed(ig) => match indexed_membership(ig, w, budget)? {
            Membership::Yes(t) => Ok(Witness::Tree(ig.clone(), t)),
            Membership::NoWithinBudget(s) => Err(missing(s)),
        },
        AnyGrammar::Unification(ug) => match sug_membership(ug, w, budget)? {
            Membership::Yes((cs, fs)) => Ok(Witness::CStructure(ug.clone(), cs, fs)),
            Membership::NoWithinBudget(s) => Err(missing(s)),
        },
    })
}

fn spell(names: &SymbolSet, ids: impl Iterator<Item = u32>) -> String {
    let parts: Vec<&str> = ids.map(|i| names.name(i)).collect();
    if parts.iter().all(|p| p.chars().count() == 1) {
        parts.concat()
    } else {
        parts.join(" ")
    }
}

fn print_tree(g: &IndexedGrammar, t: &DerivationTree, out: &mut dyn Write) -> Result<()> {
    for (x, label) in t.labels() {
        let indent = "  ".repeat(x.depth());
        let text = match label {
            IxLabel::Node { symbol, stack } if stack.is_empty() => g.nt_name(*symbol).to_string(),
            IxLabel::Node { symbol, stack } => {
                format!("{} {}", g.nt_name(*symbol), spell(g.indices(), stack.iter().map(|i| i.0)))
            }
            IxLabel::Leaf(Some(w)) => g.term_name(*w).to_string(),
            IxLabel::Leaf(None) => "_".to_string(),
        };
        writeln!(out, "{indent}{x} {text}")?;
    }
    Ok(())
}

fn print_cstructure(g: &UnificationGrammar, cs: &CStructure, fs: &FeatureStructure, out: &mut dyn Write) -> Result<()> {
    for (x, cat) in cs.categories() {
        let indent = "  ".repeat(x.depth());
        let text = match cat {
            UCat::N(a) => g.nt_name(*a).to_string(),
            UCat::Leaf(Some(w)) => g.term_name(*w).to_string(),
            UCat::Leaf(None) => "_".to_string(),
        };
        match cs.schema(x).filter(|s| !s.is_empty()) {
            Some(s) => writeln!(out, "{indent}{x} {text} {}", g.display_schema(s))?,
            None => writeln!(out, "{indent}{x} {text}")?,
        }
    }
    writeln!(out, "feature structure: {} nodes", fs.node_count())?;
    for ((q, a), p) in fs.edges() {
        writeln!(out, "  q{q} {} q{p}", g.attr_name(*a))?;
    }
    for (q, v) in fs.values() {
        writeln!(out, "  q{q} = {}", g.value_name(*v))?;
    }
    for (x, q) in fs.names() {
        writeln!(out, "  {x} : q{q}")?;
    }
    Ok(())
}

fn member(path: &Path, word: &str, budget: Budget, out: &mut dyn Write) -> Result<i32> {
    let g = load(path)?;
    let w = word_of(&g, word)?;
    match find_witness(&g, &w, budget)? {
        Ok(witness) => {
            writeln!(out, "yes")?;
            match witness {
                Witness::Tree(g, t) => print_tree(&g, &t, out)?,
                Witness::CStructure(g, cs, fs) => print_cstructure(&g, &cs, &fs, out)?,
            }
            Ok(0)
        }
        Err(message) => {
            writeln!(out, "{message}")?;
            Ok(2)
        }
    }
}

fn sorted_words(words: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = words.into_iter().collect();
    v.sort_by(|a, b| (a.chars().count(), a).cmp(&(b.chars().count(), b)));
    v
}

/// Words by length, then alphabetically. Lengths count terminals, so
/// space-separated words sort by their number of terminals.
fn shortlex(terminals: &SymbolSet, words: &BTreeSet<Vec<Term>>) -> Vec<String> {
    let mut v: Vec<(usize, String)> = words.iter().map(|w| (w.len(), format_word(terminals, w))).collect();
    v.sort();
    v.into_iter().map(|(_, s)| s).collect()
}

#[derive(Serialize)]
struct EnumReport {
    max_len: usize,
    words: Vec<String>,
    method: &'static str,
    complete: bool,
}

fn enumerate(path: &Path, max_len: usize, json: bool, budget: Budget, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = load(path)?;
    let l = language_upto(&g, max_len, budget);
    let words = shortlex(g.terminals(), &l.words);
    let complete = l.is_complete();
    if json {
        let report = EnumReport {
            max_len,
            words,
            method: match l.method {
                Method::Exact => "exact",
                Method::Bounded(_) => "bounded",
            },
            complete,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        for w in &words {
            writeln!(out, "{w}")?;
        }
    }
    if !complete {
        writeln!(err, "warning: bounded search did not cover every derivation; words may be missing")?;
    }
    Ok(0)
}

fn transform(path: &Path, op: Op, target: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let g = load(path)?;
    let need_indexed = |g: &AnyGrammar| match g {
        AnyGrammar::Indexed(g) => Ok(g.clone()),
        AnyGrammar::Unification(_) => Err(anyhow!("this transformation takes an indexed grammar (.ixg)")),
    };
    let need_unification = |g: &AnyGrammar| match g {
        AnyGrammar::Unification(g) => Ok(g.clone()),
        AnyGrammar::Indexed(_) => Err(anyhow!("this transformation takes a unification grammar (.ugr)")),
    };
    let text = match op {
        Op::MarkEnd => print_indexed_grammar(&need_indexed(&g)?.mark_index_end()),
        Op::U => {
            let ig = need_indexed(&g)?;
            let (ug, corr) = u_transform(&ig)?;
            let mut lines = vec!["rule correspondence, indexed <=> unification:".to_string()];
            lines.extend(corr.describe(&ig, &ug));
            comment_block(&lines) + "\n" + &print_unification_grammar(&ug)
        }
        Op::ReverseU => {
            let ug = need_unification(&g)?;
            let (ig, corr) = reverse_u(&ug)?;
            let mut lines = vec!["rule correspondence, indexed <=> unification:".to_string()];
            lines.extend(corr.describe(&ig, &ug));
            comment_block(&lines) + "\n" + &print_indexed_grammar(&ig)
        }
        Op::UgiNormalize => print_unification_grammar(&ugi_normalize(&need_unification(&g)?)?),
        Op::SinkMap => print_unification_grammar(&sink_map_root(&need_unification(&g)?)?),
    };
    match target {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct EquivReport {
    max_len: usize,
    agree: bool,
    left_only: Vec<String>,
    right_only: Vec<String>,
    common: Vec<String>,
    left_budget_exhausted: bool,
    right_budget_exhausted: bool,
}

fn equiv(left: &Path, right: &Path, max_len: usize, json: bool, budget: Budget, out: &mut dyn Write) -> Result<i32> {
    let (l, r) = (load(left)?, load(right)?);
    let v = equivalence(&l, &r, max_len, budget);
    let report = EquivReport {
        max_len,
        agree: v.agree,
        left_only: sorted_words(v.left_only),
        right_only: sorted_words(v.right_only),
        common: sorted_words(v.both),
        left_budget_exhausted: v.left_budget_exhausted,
        right_budget_exhausted: v.right_budget_exhausted,
    };
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "agree: {} (words up to length {max_len})", yes_no(report.agree))?;
        writeln!(out, "{}", word_line("common", &report.common))?;
        writeln!(out, "{}", word_line("left-only", &report.left_only))?;
        writeln!(out, "{}", word_line("right-only", &report.right_only))?;
        for (side, exhausted) in [("left", report.left_budget_exhausted), ("right", report.right_budget_exhausted)] {
            if exhausted {
                writeln!(out, "warning: {side} language from a search that ran out of budget")?;
            }
        }
    }
    Ok(if report.agree { 0 } else { 2 })
}

fn derive(path: &Path, word: &str, target: Option<&Path>, budget: Budget, out: &mut dyn Write) -> Result<i32> {
    let g = load(path)?;
    let w = word_of(&g, word)?;
    let witness = match find_witness(&g, &w, budget)? {
        Ok(witness) => witness,
        Err(message) => {
            writeln!(out, "{message}")?;
            return Ok(2);
        }
    };
    let text = match witness {
        Witness::Tree(g, t) => derivation_dot(&g, &t),
        Witness::CStructure(g, cs, fs) => cstructure_dot(&g, &cs) + &feature_dot(&fs, g.attributes(), g.values()),
    };
    match target {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn word_line(label: &str, words: &[String]) -> String {
    let mut line = format!("{label}:");
    for w in words {
        line.push(' ');
        line.push_str(w);
    }
    line
}
