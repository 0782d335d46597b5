//! Random statement text for property suites. Everything is produced as source
//! text and parsed, so generated trees have exactly the shapes the parser builds.
use rand::seq::SliceRandom;
use rand::Rng;

use std::collections::BTreeSet;

use crate::evolast::{apply_expr_rewrite, equiv_oracle, RewriteSite};
use crate::statement::{parse_expression, parse_file, print_expr, Expr, StatementFile, SymbolStyle};

pub const PROP_ATOMS: [&str; 4] = ["P", "Q", "R", "S"];
pub const INT_ATOMS: [&str; 3] = ["a", "b", "c"];

/// Proposition of nesting depth at most `depth` over at most `props` proposition
/// atoms and `ints` integer atoms, fully parenthesized and in a mix of ASCII and
/// Unicode spellings.
pub fn prop_text<R: Rng>(rng: &mut R, depth: usize, props: usize, ints: usize) -> String {
    let props = &PROP_ATOMS[..props.clamp(1, PROP_ATOMS.len())];
    let ints = &INT_ATOMS[..ints.min(INT_ATOMS.len())];
    prop(rng, depth, props, ints)
}

fn pick<'a, R: Rng>(rng: &mut R, a: &'a str, b: &'a str) -> &'a str {
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

fn operand<R: Rng>(rng: &mut R, ints: &[&str]) -> String {
    if ints.is_empty() || rng.gen_bool(0.2) {
        rng.gen_range(0..3).to_string()
    } else {
        ints.choose(rng).unwrap().to_string()
    }
}

fn leaf<R: Rng>(rng: &mut R, props: &[&str], ints: &[&str]) -> String {
    match rng.gen_range(0..10) {
        0 => pick(rng, "True", "False").to_string(),
        1..=5 => props.choose(rng).unwrap().to_string(),
        _ => {
            let op = match rng.gen_range(0..6) {
                0 => "=",
                1 => pick(rng, "≠", "!="),
                2 => "<",
                3 => pick(rng, "≤", "<="),
                4 => ">",
                _ => pick(rng, "≥", ">="),
            };
            format!("{} {op} {}", operand(rng, ints), operand(rng, ints))
        }
    }
}

fn prop<R: Rng>(rng: &mut R, depth: usize, props: &[&str], ints: &[&str]) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng, props, ints);
    }
    let sub = |rng: &mut R| prop(rng, depth - 1, props, ints);
    match rng.gen_range(0..12) {
        0 => format!("{}({})", pick(rng, "¬", "¬ "), sub(rng)),
        1..=3 => format!("({}) {} ({})", sub(rng), pick(rng, "∧", "/\\"), sub(rng)),
        4..=6 => format!("({}) {} ({})", sub(rng), pick(rng, "∨", "\\/"), sub(rng)),
        7 => format!("({}) {} ({})", sub(rng), pick(rng, "↔", "<->"), sub(rng)),
        8..=9 => format!("({}) {} ({})", sub(rng), pick(rng, "→", "->"), sub(rng)),
        10 => format!("{} x : ℕ, ({})", pick(rng, "∀", "∃"), sub(rng)),
        _ => format!("{} ({}) ({})", ["And", "Or", "Iff"].choose(rng).unwrap(), sub(rng), sub(rng)),
    }
}

pub fn random_prop<R: Rng>(rng: &mut R, depth: usize, props: usize, ints: usize) -> Expr {
    let text = prop_text(rng, depth, props, ints);
    parse_expression(&text).unwrap_or_else(|e| panic!("generated text must parse: {text:?}: {e}"))
}

/// Term-level expression text: applications, arithmetic, lambdas, numbers.
fn term<R: Rng>(rng: &mut R, names: &[String], depth: usize) -> String {
    let v = |rng: &mut R| names.choose(rng).cloned().unwrap_or_else(|| "0".into());
    if depth == 0 {
        return if rng.gen_bool(0.7) { v(rng) } else { rng.gen_range(0..100).to_string() };
    }
    match rng.gen_range(0..6) {
        0 => format!("{} * {}", v(rng), term(rng, names, depth - 1)),
        1 => format!("{} + {}", term(rng, names, depth - 1), v(rng)),
        2 => format!("f ({}) {}", term(rng, names, depth - 1), v(rng)),
        3 => format!("Nat.succ {}", v(rng)),
        4 => format!("(fun t => t + {}) {}", v(rng), v(rng)),
        _ => format!("{}⁻¹", v(rng)),
    }
}

fn goal<R: Rng>(rng: &mut R, names: &[String], depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        let op = ["=", "≠", "<", "≤", ">", "≥", "!=", "<=", ">="].choose(rng).unwrap();
        return match rng.gen_range(0..5) {
            0 => format!("Even {}", names.choose(rng).cloned().unwrap_or_else(|| "0".into())),
            1 => format!("Nat.Prime ({})", term(rng, names, 1)),
            _ => format!("{} {op} {}", term(rng, names, 1), term(rng, names, 1)),
        };
    }
    match rng.gen_range(0..7) {
        0 => format!("¬({})", goal(rng, names, depth - 1)),
        1 => format!("{} ∧ {}", paren(goal(rng, names, depth - 1)), paren(goal(rng, names, depth - 1))),
        2 => format!("{} ∨ {}", paren(goal(rng, names, depth - 1)), paren(goal(rng, names, depth - 1))),
        3 => format!("{} ↔ {}", paren(goal(rng, names, depth - 1)), paren(goal(rng, names, depth - 1))),
        4 => format!("{} → {}", paren(goal(rng, names, depth - 1)), goal(rng, names, depth - 1)),
        5 => {
            let q = ["y", "z", "w"].choose(rng).unwrap().to_string();
            let mut inner = names.to_vec();
            inner.push(q.clone());
            let ty = pick(rng, "ℕ", "ℤ");
            format!("{} {q} : {ty}, {}", pick(rng, "∀", "∃"), goal(rng, &inner, depth - 1))
        }
        _ => format!("∑ i in Finset.range {}, i = {}", names.choose(rng).cloned().unwrap_or_else(|| "3".into()), term(rng, names, 0)),
    }
}

fn paren(s: String) -> String {
    format!("({s})")
}

/// Source text of a random single-declaration file covering every grammar
/// construct. The file always parses.
pub fn random_file_text<R: Rng>(rng: &mut R) -> String {
    let mut lines = vec!["import Mathlib".to_string()];
    if rng.gen_bool(0.5) {
        lines.push("import Aesop".into());
    }
    if rng.gen_bool(0.4) {
        lines.push("open Nat Real".into());
    }
    if rng.gen_bool(0.2) {
        lines.push("-- generated".into());
    }
    let mut names: Vec<String> = Vec::new();
    let mut binders = Vec::new();
    if rng.gen_bool(0.3) {
        binders.push("{G : Type*} [Group G]".to_string());
    }
    for (i, pool) in [["n", "m"], ["k", "j"], ["x", "u"]].iter().enumerate() {
        if rng.gen_bool(0.7) {
            let count = rng.gen_range(1..=2);
            let ns: Vec<String> = pool[..count].iter().map(|s| s.to_string()).collect();
            let ty = ["ℕ", "ℤ", "ℝ"][i];
            let (open, close) = if rng.gen_bool(0.15) { ("{", "}") } else { ("(", ")") };
            binders.push(format!("{open}{} : {ty}{close}", ns.join(" ")));
            names.extend(ns);
        }
    }
    if !names.is_empty() && rng.gen_bool(0.6) {
        binders.push(format!("(h : {})", goal(rng, &names, 1)));
    }
    if rng.gen_bool(0.2) {
        binders.push("[Fact (1 < 2)]".into());
    }
    let kw = if rng.gen_bool(0.8) { "theorem" } else { "lemma" };
    let name = format!("gen_{}", rng.gen_range(0..1000));
    let sep = if rng.gen_bool(0.2) { "\n    " } else { " " };
    let head = if binders.is_empty() { String::new() } else { format!("{sep}{}", binders.join(" ")) };
    let depth = rng.gen_range(0..=3);
    let body = goal(rng, &names, depth);
    let proof = if rng.gen_bool(0.8) { "by sorry" } else { "by\n  sorry" };
    format!("{}\n\n{kw} {name}{head} :{sep}{body} := {proof}", lines.join("\n"))
}

/// Textual variant of the same statement: the declaration name changes and
/// whitespace runs in the declaration are widened.
pub fn respell<R: Rng>(text: &str, rng: &mut R) -> String {
    let mut f = parse_file(text).expect("respell input parses");
    f.decl_name = format!("renamed_{}", rng.gen_range(0..1000));
    let printed = crate::statement::print_file(&f);
    // preamble lines are kept as they are
    let split = printed.rfind("\ntheorem ").or_else(|| printed.rfind("\nlemma ")).map_or(0, |p| p + 1);
    let mut out = printed[..split].to_string();
    for ch in printed[split..].chars() {
        out.push(ch);
        if ch == ' ' && rng.gen_bool(0.3) {
            out.push_str(if rng.gen_bool(0.5) { "  " } else { "\n  " });
        }
    }
    out
}

/// Renames every header binder name (and its uses) to a fresh name.
pub fn alpha_rename(f: &StatementFile) -> StatementFile {
    let mut g = f.clone();
    let old: Vec<String> = f.binder_names();
    let fresh = |n: &str| if old.iter().any(|o| o == n) { format!("{n}_r") } else { n.to_string() };
    for b in &mut g.binders {
        b.names = b.names.iter().map(|n| fresh(n)).collect();
        b.type_expr.map_identifiers(&mut |id| fresh(id));
    }
    g.goal.map_identifiers(&mut |id| fresh(id));
    g
}

/// A strictly different statement: one extra conjunct on the goal.
pub fn perturb(f: &StatementFile) -> StatementFile {
    let mut g = f.clone();
    g.goal = Expr::and(g.goal.clone(), Expr::atom("True"));
    g
}

/// Copy of `e` with the skeleton node at `path` replaced.
pub fn replace_at(e: &Expr, path: &[usize], with: &Expr) -> Option<Expr> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(with.clone());
    };
    let mut out = e.clone();
    let child = match &mut out {
        Expr::Connective { operands, .. } => operands.get_mut(i)?,
        Expr::Arrow(a, _) if i == 0 => a.as_mut(),
        Expr::Arrow(_, b) if i == 1 => b.as_mut(),
        Expr::Quantifier { body, .. } if i == 0 => body.as_mut(),
        _ => return None,
    };
    *child = replace_at(child, rest, with)?;
    Some(out)
}

/// Applies one rewrite and checks it: truth-table equivalence on ints in
/// -2..=2, nothing outside the site's subtree changes, and no bound name
/// appears that was not there before.
pub fn audit_rewrite(e: &Expr, site: &RewriteSite) -> Result<Expr, String> {
    let show = |x: &Expr| print_expr(x, SymbolStyle::Unicode);
    let out = apply_expr_rewrite(e, &site.path, site.rule, site.side).ok_or_else(|| format!("site {site:?} did not apply to {}", show(e)))?;
    match equiv_oracle(e, &out, -2..=2) {
        Ok(true) => {}
        Ok(false) => return Err(format!("{} changed meaning: {} => {}", site.rule.as_str(), show(e), show(&out))),
        Err(err) => return Err(format!("oracle: {err}")),
    }
    let hole = Expr::atom("□");
    if replace_at(e, &site.path, &hole) != replace_at(&out, &site.path, &hole) {
        return Err(format!("{} touched nodes outside {:?}: {} => {}", site.rule.as_str(), site.path, show(e), show(&out)));
    }
    let bound = |x: &Expr| {
        let mut v = Vec::new();
        x.bound_names(&mut v);
        v.into_iter().collect::<BTreeSet<_>>()
    };
    if !bound(&out).is_subset(&bound(e)) {
        return Err(format!("{} introduced a binder: {}", site.rule.as_str(), show(&out)));
    }
    Ok(out)
}
