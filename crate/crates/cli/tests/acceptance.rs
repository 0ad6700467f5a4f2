//! Acceptance suite. Prints one pass/fail line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use glab_core::feature::{solve, Equation};
use glab_core::format::{parse_indexed_grammar, parse_unification_grammar};
use glab_core::fuzz::{
    random_cstructure, random_equations, random_indexed_grammar, random_indexed_loose, random_ugi_grammar,
    random_ugi_loose, rng, EquationParams, GrammarParams,
};
use glab_core::indexed::indexed_membership;
use glab_core::lang::{language_upto, AnyGrammar, Language};
use glab_core::symbol::{Attr, Term, Value};
use glab_core::transforms::{reverse_u, u_transform};
use glab_core::tree::TreeAddress;
use glab_core::unification::{canonical_fs, sink_map_root, sug_membership, ugi_check, ugi_normalize};
use glab_core::Budget;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = glab_cli::run(std::iter::once("glab").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn named(g: &AnyGrammar, l: &Language) -> BTreeSet<Vec<String>> {
    l.words
        .iter()
        .map(|w| w.iter().map(|t| g.terminals().name(t.0).to_string()).collect())
        .collect()
}

fn enum_abc() -> Outcome {
    let start = Instant::now();
    let (code, out, _) = cli(&["enum", &fixture("abc.ixg"), "--max-len", "9", "--json"]);
    let took = start.elapsed();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let words: BTreeSet<&str> = v["words"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    let want = BTreeSet::from(["abc", "aabbcc", "aaabbbccc"]);
    outcome(
        code == 0 && words == want && v["complete"] == true && took < Duration::from_secs(5),
        format!("words {words:?} in {}", secs(took)),
    )
}

fn equiv_doubling() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("doubling_u.ugr");
    let start = Instant::now();
    let (tcode, _, terr) = cli(&["transform", &fixture("doubling.ixg"), "--op", "u", "-o", image.to_str().unwrap()]);
    if tcode != 0 {
        return outcome(false, format!("transform failed: {terr}"));
    }
    let (code, out, _) = cli(&[
        "equiv",
        &fixture("doubling.ixg"),
        image.to_str().unwrap(),
        "--max-len",
        "8",
        "--json",
    ]);
    let took = start.elapsed();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let common: Vec<&str> = v["common"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    let pass = code == 0
        && v["agree"] == true
        && common == ["dd", "dddd", "dddddddd"]
        && v["left_budget_exhausted"] == false
        && v["right_budget_exhausted"] == false
        && took < Duration::from_secs(60);
    outcome(pass, format!("agree {}, common {common:?}, in {}", v["agree"], secs(took)))
}

fn witnesses() -> Outcome {
    let g1 = parse_indexed_grammar(&read("abc.ixg")).unwrap();
    let w1: Vec<Term> = "aabbcc".chars().map(|c| g1.term(&c.to_string()).unwrap()).collect();
    let tree_ok = match indexed_membership(&g1, &w1, Budget::default()).unwrap().witness() {
        Some(t) => t.validate(&g1).is_ok() && t.terminal_string() == w1,
        None => false,
    };
    let g2 = parse_unification_grammar(&read("doubling_u.ugr")).unwrap();
    let w2 = vec![g2.term("d").unwrap(); 4];
    let (cs_ok, iso) = match sug_membership(&g2, &w2, Budget::default()).unwrap().witness() {
        Some((cs, fs)) => {
            let solved = cs.generates_check();
            let valid = cs.terminal_string() == w2
                && fs.well_defined_check().is_well_defined()
                && fs.satisfies_set(&cs.collect_equations()).unwrap()
                && solved.model().is_some_and(|m| m.isomorphic(fs));
            let canonical = canonical_fs(cs).unwrap();
            (valid, canonical.model().is_some_and(|m| m.isomorphic(fs)))
        }
        None => (false, false),
    };
    outcome(
        tree_ok && cs_ok && iso,
        format!("aabbcc tree valid {tree_ok}, dddd c-structure valid {cs_ok}, isomorphic to canonical {iso}"),
    )
}

/// Every word over the terminals up to `maxlen`.
fn all_words(terminals: usize, maxlen: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..maxlen {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<Term>| {
                (0..terminals as u32).map(move |t| {
                    let mut v = w.clone();
                    v.push(Term(t));
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn indexed_vs_image() -> Outcome {
    let start = Instant::now();
    let budget = Budget {
        max_nodes: 512,
        max_trees: 1_000_000,
    };
    let probe = Budget {
        max_nodes: 512,
        max_trees: 20_000,
    };
    let (mut disagreements, mut incomplete, mut nonempty, mut witness_misses) = (0, 0, 0, 0);
    let n = 100;
    for seed in 0..n {
        let g = random_indexed_grammar(&mut rng(seed), GrammarParams::default());
        let (u, _) = u_transform(&g).unwrap();
        let (gi, gu) = (AnyGrammar::Indexed(g), AnyGrammar::Unification(u.clone()));
        let (li, lu) = (language_upto(&gi, 4, budget), language_upto(&gu, 4, budget));
        if !li.is_complete() || !lu.is_complete() {
            incomplete += 1;
        }
        if named(&gi, &li) != named(&gu, &lu) {
            disagreements += 1;
        }
        if !li.words.is_empty() {
            nonempty += 1;
        }
        // the unification side by direct search, string by string
        for w in all_words(u.terminals().len(), 4) {
            let found = sug_membership(&u, &w, if li.words.contains(&w) { budget } else { probe })
                .unwrap()
                .is_yes();
            if found != li.words.contains(&w) {
                witness_misses += 1;
            }
        }
    }
    let took = start.elapsed();
    outcome(
        disagreements == 0 && incomplete == 0 && witness_misses == 0 && took < Duration::from_secs(600),
        format!(
            "{n} grammars ({nonempty} with non-empty languages), {disagreements} disagreements, \
             {incomplete} incomplete, {witness_misses} search mismatches, in {}",
            secs(took)
        ),
    )
}

fn reverse_round_trip() -> Outcome {
    let n = 100;
    let mut failures = 0;
    for seed in 0..n {
        let g = random_ugi_grammar(&mut rng(seed), GrammarParams::default());
        let ok = reverse_u(&g)
            .ok()
            .and_then(|(ig, _)| u_transform(&ig).ok())
            .is_some_and(|(back, _)| back.same_structure(&g));
        if !ok {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{n} grammars, {failures} failures"))
}

fn canonical_agreement() -> Outcome {
    let p = GrammarParams {
        lexicon_everywhere: true,
        ..GrammarParams::default()
    };
    let (mut checked, mut disagreements, mut consistent, mut not_isomorphic) = (0, 0, 0, 0);
    let mut seed = 0;
    while checked < 1000 {
        seed += 1;
        let g = random_ugi_grammar(&mut rng(seed), p);
        let Some(cs) = random_cstructure(&mut rng(seed + 1_000_000), &g, 5) else {
            continue;
        };
        checked += 1;
        let solved = cs.generates_check();
        let canonical = canonical_fs(&cs).unwrap();
        if solved.is_consistent() != canonical.is_consistent() {
            disagreements += 1;
        }
        if let (Some(a), Some(b)) = (solved.model(), canonical.model()) {
            consistent += 1;
            if !a.isomorphic(b) {
                not_isomorphic += 1;
            }
        }
    }
    outcome(
        disagreements == 0,
        format!(
            "{checked} c-structures ({consistent} consistent), {disagreements} disagreements, \
             {not_isomorphic} consistent pairs not isomorphic"
        ),
    )
}

fn preservation() -> Outcome {
    let budget = Budget::default();
    let same = |a: &AnyGrammar, b: &AnyGrammar| {
        let (la, lb) = (language_upto(a, 4, budget), language_upto(b, 4, budget));
        la.is_complete() && lb.is_complete() && named(a, &la) == named(b, &lb)
    };
    let loose = GrammarParams {
        nonterminals: 3,
        rules: 6,
        ..GrammarParams::default()
    };
    let n = 60;
    let (mut mark_fail, mut norm_fail, mut sink_fail) = (0, 0, 0);
    let mut nonempty = 0;
    for seed in 0..n {
        let g = random_indexed_loose(&mut rng(seed), loose);
        let marked = g.mark_index_end();
        if !marked.marked_index_end_check() || !same(&AnyGrammar::Indexed(g.clone()), &AnyGrammar::Indexed(marked)) {
            mark_fail += 1;
        }
        let u = random_ugi_loose(&mut rng(seed), loose);
        let any = AnyGrammar::Unification(u.clone());
        if !language_upto(&any, 4, budget).words.is_empty() {
            nonempty += 1;
        }
        match ugi_normalize(&u) {
            Ok(v) if ugi_check(&v).is_reduced && same(&any, &AnyGrammar::Unification(v.clone())) => {}
            _ => norm_fail += 1,
        }
        match sink_map_root(&u) {
            Ok(v) if ugi_check(&v).has_sink_mapped_root && same(&any, &AnyGrammar::Unification(v.clone())) => {}
            _ => sink_fail += 1,
        }
    }
    outcome(
        mark_fail + norm_fail + sink_fail == 0,
        format!(
            "{n} grammars per transformation ({nonempty} unification ones non-empty): failures mark-end {mark_fail}, \
             ugi-normalize {norm_fail}, sink-map {sink_fail}"
        ),
    )
}

/// Backtracking search for a well-defined feature structure with at most
/// `nodes` nodes satisfying every equation. Edges, values, and names are
/// chosen when an equation first needs them.
struct Oracle<'a> {
    es: Vec<&'a Equation>,
    nodes: usize,
    names: BTreeMap<TreeAddress, usize>,
    delta: BTreeMap<(usize, Attr), usize>,
    alpha: BTreeMap<usize, Value>,
}

impl Oracle<'_> {
    fn eval(&mut self, x: &TreeAddress, path: &[Attr], k: &mut dyn FnMut(&mut Self, usize) -> bool) -> bool {
        match self.names.get(x) {
            Some(&q) => self.step(q, path, k),
            None => {
                for q in 0..self.nodes {
                    self.names.insert(x.clone(), q);
                    if self.step(q, path, k) {
                        return true;
                    }
                }
                self.names.remove(x);
                false
            }
        }
    }

    fn step(&mut self, q: usize, path: &[Attr], k: &mut dyn FnMut(&mut Self, usize) -> bool) -> bool {
        let Some((&a, rest)) = path.split_first() else {
            return k(self, q);
        };
        match self.delta.get(&(q, a)) {
            Some(&p) => self.step(p, rest, k),
            None => {
                for p in 0..self.nodes {
                    self.delta.insert((q, a), p);
                    if self.step(p, rest, k) {
                        return true;
                    }
                }
                self.delta.remove(&(q, a));
                false
            }
        }
    }

    fn satisfy(&mut self, i: usize) -> bool {
        let Some(e) = self.es.get(i).copied() else {
            return self.well_defined();
        };
        match e {
            Equation::PathEq { x1, p1, x2, p2 } => {
                self.eval(x1, p1, &mut |o, q1| o.eval(x2, p2, &mut |o, q2| q1 == q2 && o.satisfy(i + 1)))
            }
            Equation::ValEq { x, path, value } => self.eval(x, path, &mut |o, q| match o.alpha.get(&q) {
                Some(v) => v == value && o.satisfy(i + 1),
                None => {
                    o.alpha.insert(q, *value);
                    let found = o.satisfy(i + 1);
                    o.alpha.remove(&q);
                    found
                }
            }),
        }
    }

    /// Atoms have no out-edges and no node reaches itself.
    fn well_defined(&self) -> bool {
        if self.delta.keys().any(|(q, _)| self.alpha.contains_key(q)) {
            return false;
        }
        let succ = |q: usize| self.delta.iter().filter(move |((p, _), _)| *p == q).map(|(_, r)| *r);
        (0..self.nodes).all(|start| {
            let mut seen = BTreeSet::new();
            let mut todo: Vec<usize> = succ(start).collect();
            while let Some(q) = todo.pop() {
                if q == start {
                    return false;
                }
                if seen.insert(q) {
                    todo.extend(succ(q));
                }
            }
            true
        })
    }
}

fn has_small_model(es: &BTreeSet<Equation>, max_nodes: usize) -> bool {
    (1..=max_nodes).any(|nodes| {
        Oracle {
            es: es.iter().collect(),
            nodes,
            names: BTreeMap::new(),
            delta: BTreeMap::new(),
            alpha: BTreeMap::new(),
        }
        .satisfy(0)
    })
}

fn solver_oracle() -> Outcome {
    let n = 300;
    let (mut disagreements, mut consistent, mut bad_models) = (0, 0, 0);
    for seed in 0..n {
        let (es, names) = random_equations(&mut rng(seed), EquationParams::default());
        let result = solve(&es, &names).unwrap();
        if let Some(m) = result.model() {
            consistent += 1;
            if !m.well_defined_check().is_well_defined() || !m.satisfies_set(&es).unwrap() {
                bad_models += 1;
            }
        }
        if result.is_consistent() != has_small_model(&es, 4) {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0 && bad_models == 0,
        format!("{n} equation sets ({consistent} consistent), {disagreements} disagreements, {bad_models} bad models"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_glab");
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("out").display().to_string();
    let f = fixture;
    let commands: Vec<Vec<String>> = [
        vec!["check", &f("abc.ixg")],
        vec!["check", &f("doubling.ixg"), "--json"],
        vec!["check", &f("doubling_u.ugr")],
        vec!["check", &f("agreement.ugr"), "--json"],
        vec!["check", &f("wide.ugr")],
        vec!["enum", &f("abc.ixg"), "--max-len", "9"],
        vec!["enum", &f("doubling.ixg"), "--max-len", "8", "--json"],
        vec!["enum", &f("doubling_u.ugr"), "--max-len", "8"],
        vec!["enum", &f("agreement.ugr"), "--max-len", "3", "--json"],
        vec!["enum", &f("wide.ugr"), "--max-len", "4"],
        vec!["member", &f("abc.ixg"), "aabbcc"],
        vec!["member", &f("doubling.ixg"), "ddddd"],
        vec!["member", &f("doubling_u.ugr"), "dddd"],
        vec!["member", &f("agreement.ugr"), "dogs bark"],
        vec!["transform", &f("abc.ixg"), "--op", "mark-end"],
        vec!["transform", &f("doubling.ixg"), "--op", "u", "-o", &out_file],
        vec!["transform", &f("doubling_u.ugr"), "--op", "reverse-u"],
        vec!["transform", &f("wide.ugr"), "--op", "ugi-normalize"],
        vec!["transform", &f("wide.ugr"), "--op", "sink-map"],
        vec!["transform", &f("abc.ixg"), "--op", "u"],
        vec!["equiv", &f("doubling.ixg"), &f("doubling_u.ugr"), "--max-len", "8", "--json"],
        vec!["equiv", &f("abc.ixg"), &f("doubling.ixg"), "--max-len", "6"],
        vec!["derive", &f("abc.ixg"), "aabbcc", "--dot", &out_file],
        vec!["derive", &f("doubling_u.ugr"), "dddd"],
        vec!["derive", &f("doubling.ixg"), "ddd"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    let mut differing = Vec::new();
    for c in &commands {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let _ = std::fs::remove_file(&out_file);
            let o = Command::new(bin).args(c).output().unwrap();
            let written = std::fs::read(&out_file).ok();
            runs.push((o.status.code(), o.stdout, o.stderr, written));
        }
        if runs[0] != runs[1] {
            differing.push(c[0].clone());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands run twice, differing: {differing:?}", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("enumerate the a^n b^n c^n grammar up to length 9", enum_abc),
        ("the doubling grammar agrees with its unification image up to length 8", equiv_doubling),
        ("membership witnesses validate", witnesses),
        ("indexed and unification image languages agree on random grammars", indexed_vs_image),
        ("reverse translation round trip on random UGI grammars", reverse_round_trip),
        ("solver and canonical structure agree on random c-structures", canonical_agreement),
        ("transformations preserve languages up to length 4", preservation),
        ("solver agrees with exhaustive small-model search", solver_oracle),
        ("every command is deterministic on the fixtures", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {} {}: {name}: {} [{}]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            secs(start.elapsed())
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
