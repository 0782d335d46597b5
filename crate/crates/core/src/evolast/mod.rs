//! Rule-based rewriting of the logical skeleton of a statement (binder types and
//! goal), plus a brute-force equivalence oracle used to check the rules.

mod oracle;

pub use oracle::{equiv_oracle, equiv_oracle_with_cap, statement_prop, OracleError, DEFAULT_ORACLE_CAP};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statement::{Conn, Expr, Rel, StatementFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    AndComm,
    OrComm,
    AndAssoc,
    OrAssoc,
    AndOrDistrib,
    OrAndDistrib,
    IffSymm,
    EqSymm,
    RelDualLtGt,
    RelDualLeGe,
    HypReorder,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::AndComm,
        RuleId::OrComm,
        RuleId::AndAssoc,
        RuleId::OrAssoc,
        RuleId::AndOrDistrib,
        RuleId::OrAndDistrib,
        RuleId::IffSymm,
        RuleId::EqSymm,
        RuleId::RelDualLtGt,
        RuleId::RelDualLeGe,
        RuleId::HypReorder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::AndComm => "and_comm",
            RuleId::OrComm => "or_comm",
            RuleId::AndAssoc => "and_assoc",
            RuleId::OrAssoc => "or_assoc",
            RuleId::AndOrDistrib => "and_or_distrib",
            RuleId::OrAndDistrib => "or_and_distrib",
            RuleId::IffSymm => "iff_symm",
            RuleId::EqSymm => "eq_symm",
            RuleId::RelDualLtGt => "rel_dual_lt_gt",
            RuleId::RelDualLeGe => "rel_dual_le_ge",
            RuleId::HypReorder => "hyp_reorder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// Type of the binder group at this index. For `hyp_reorder` the group is
    /// swapped with its right neighbour.
    Binder(usize),
    Goal,
}

/// Which way a two-sided rule applies.
///
/// Associativity: `Left` rotates `(A op B) op C` to `A op (B op C)`, `Right` the
/// reverse. Distributivity: `Left` expands `A op (B op' C)`, `Right` expands
/// `(A op' B) op C`. Other rules only use `Left`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A rule application point. `path` walks skeleton children from the root of the
/// location: connective operands by index, arrow sides 0/1, quantifier body 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewriteSite {
    pub location: Location,
    pub path: Vec<usize>,
    pub rule: RuleId,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rewrite site no longer applies: {0:?}")]
    SiteInvalid(RewriteSite),
}

/// Every applicable (rule, path) pair, binders first then goal, each in pre-order.
pub fn enumerate_sites(f: &StatementFile) -> Vec<RewriteSite> {
    let mut sites = Vec::new();
    for (i, b) in f.binders.iter().enumerate() {
        expr_sites(&b.type_expr, Location::Binder(i), &mut Vec::new(), &mut sites);
        if hyp_reorder_ok(f, i) {
            sites.push(RewriteSite { location: Location::Binder(i), path: vec![], rule: RuleId::HypReorder, side: Side::Left });
        }
    }
    expr_sites(&f.goal, Location::Goal, &mut Vec::new(), &mut sites);
    sites
}

/// Sites inside a bare expression, reported with `Location::Goal`.
pub fn enumerate_expr_sites(e: &Expr) -> Vec<RewriteSite> {
    let mut sites = Vec::new();
    expr_sites(e, Location::Goal, &mut Vec::new(), &mut sites);
    sites
}

fn expr_sites(e: &Expr, loc: Location, path: &mut Vec<usize>, out: &mut Vec<RewriteSite>) {
    for (rule, side) in node_rules(e) {
        out.push(RewriteSite { location: loc, path: path.clone(), rule, side });
    }
    for (i, c) in skeleton_children(e).into_iter().enumerate() {
        path.push(i);
        expr_sites(c, loc, path, out);
        path.pop();
    }
}

/// Children that are themselves propositions. Relation operands, application
/// arguments and quantifier domains are terms and are never entered.
fn skeleton_children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Connective { operands, .. } => operands.iter().collect(),
        Expr::Arrow(a, b) => vec![a, b],
        Expr::Quantifier { body, .. } => vec![body],
        _ => vec![],
    }
}

fn skeleton_child_mut(e: &mut Expr, i: usize) -> Option<&mut Expr> {
    match e {
        Expr::Connective { operands, .. } => operands.get_mut(i),
        Expr::Arrow(a, b) => match i {
            0 => Some(a),
            1 => Some(b),
            _ => None,
        },
        Expr::Quantifier { body, .. } if i == 0 => Some(body),
        _ => None,
    }
}

fn binary(e: &Expr, op: Conn) -> Option<(&Expr, &Expr)> {
    match e {
        Expr::Connective { op: o, operands } if *o == op && operands.len() == 2 => Some((&operands[0], &operands[1])),
        _ => None,
    }
}

fn node_rules(e: &Expr) -> Vec<(RuleId, Side)> {
    let mut rules = Vec::new();
    for (op, dual, comm, assoc, distrib) in [
        (Conn::And, Conn::Or, RuleId::AndComm, RuleId::AndAssoc, RuleId::AndOrDistrib),
        (Conn::Or, Conn::And, RuleId::OrComm, RuleId::OrAssoc, RuleId::OrAndDistrib),
    ] {
        if let Some((a, b)) = binary(e, op) {
            if a != b {
                rules.push((comm, Side::Left));
            }
            if binary(a, op).is_some() {
                rules.push((assoc, Side::Left));
            }
            if binary(b, op).is_some() {
                rules.push((assoc, Side::Right));
            }
            if binary(b, dual).is_some() {
                rules.push((distrib, Side::Left));
            }
            if binary(a, dual).is_some() {
                rules.push((distrib, Side::Right));
            }
        }
    }
    if let Some((a, b)) = binary(e, Conn::Iff) {
        if a != b {
            rules.push((RuleId::IffSymm, Side::Left));
        }
    }
    if let Expr::Relation { op, lhs, rhs } = e {
        match op {
            Rel::Eq | Rel::Ne if lhs != rhs => rules.push((RuleId::EqSymm, Side::Left)),
            Rel::Lt | Rel::Gt => rules.push((RuleId::RelDualLtGt, Side::Left)),
            Rel::Le | Rel::Ge => rules.push((RuleId::RelDualLeGe, Side::Left)),
            _ => {}
        }
    }
    rules
}

/// Adjacent binder groups `i` and `i+1` may swap when they are not identical,
/// share no names, and neither type mentions a name the other binds.
fn hyp_reorder_ok(f: &StatementFile, i: usize) -> bool {
    let (Some(a), Some(b)) = (f.binders.get(i), f.binders.get(i + 1)) else {
        return false;
    };
    if a == b || a.names.iter().any(|n| b.names.contains(n)) {
        return false;
    }
    let mentions = |ty: &Expr, names: &[String]| {
        let mut ids = Vec::new();
        ty.identifiers(&mut ids);
        ids.iter().any(|id| {
            let first = id.split('.').next().unwrap_or(id);
            names.iter().any(|n| n == first)
        })
    };
    !mentions(&a.type_expr, &b.names) && !mentions(&b.type_expr, &a.names)
}

pub fn apply_rewrite(f: &StatementFile, site: &RewriteSite) -> Result<StatementFile, RewriteError> {
    let invalid = || RewriteError::SiteInvalid(site.clone());
    let mut g = f.clone();
    if site.rule == RuleId::HypReorder {
        let Location::Binder(i) = site.location else {
            return Err(invalid());
        };
        if !site.path.is_empty() || !hyp_reorder_ok(f, i) {
            return Err(invalid());
        }
        g.binders.swap(i, i + 1);
        return Ok(g);
    }
    let root = match site.location {
        Location::Goal => &mut g.goal,
        Location::Binder(i) => &mut g.binders.get_mut(i).ok_or_else(invalid)?.type_expr,
    };
    rewrite_at(root, &site.path, site.rule, site.side).ok_or_else(invalid)?;
    Ok(g)
}

/// Applies a rule to a bare expression at `path`.
pub fn apply_expr_rewrite(e: &Expr, path: &[usize], rule: RuleId, side: Side) -> Option<Expr> {
    let mut out = e.clone();
    rewrite_at(&mut out, path, rule, side)?;
    Some(out)
}

fn rewrite_at(root: &mut Expr, path: &[usize], rule: RuleId, side: Side) -> Option<()> {
    let mut node = root;
    for &i in path {
        node = skeleton_child_mut(node, i)?;
    }
    if !node_rules(node).contains(&(rule, side)) {
        return None;
    }
    let old = std::mem::replace(node, Expr::Atom(String::new()));
    *node = rewrite_node(old, rule, side);
    Some(())
}

fn split(e: Expr) -> (Conn, Expr, Expr) {
    match e {
        Expr::Connective { op, operands } => {
            let mut it = operands.into_iter();
            let a = it.next().expect("binary connective");
            let b = it.next().expect("binary connective");
            (op, a, b)
        }
        _ => unreachable!("checked by node_rules"),
    }
}

fn conn(op: Conn, a: Expr, b: Expr) -> Expr {
    Expr::Connective { op, operands: vec![a, b] }
}

fn rewrite_node(e: Expr, rule: RuleId, side: Side) -> Expr {
    match rule {
        RuleId::AndComm | RuleId::OrComm | RuleId::IffSymm => {
            let (op, a, b) = split(e);
            conn(op, b, a)
        }
        RuleId::AndAssoc | RuleId::OrAssoc => {
            let (op, a, b) = split(e);
            match side {
                Side::Left => {
                    let (_, a1, a2) = split(a);
                    conn(op, a1, conn(op, a2, b))
                }
                Side::Right => {
                    let (_, b1, b2) = split(b);
                    conn(op, conn(op, a, b1), b2)
                }
            }
        }
        RuleId::AndOrDistrib | RuleId::OrAndDistrib => {
            let (op, a, b) = split(e);
            match side {
                Side::Left => {
                    let (inner, b1, b2) = split(b);
                    conn(inner, conn(op, a.clone(), b1), conn(op, a, b2))
                }
                Side::Right => {
                    let (inner, a1, a2) = split(a);
                    conn(inner, conn(op, a1, b.clone()), conn(op, a2, b))
                }
            }
        }
        RuleId::EqSymm | RuleId::RelDualLtGt | RuleId::RelDualLeGe => match e {
            Expr::Relation { op, lhs, rhs } => {
                let op = match (rule, op) {
                    (RuleId::EqSymm, o) => o,
                    (_, Rel::Lt) => Rel::Gt,
                    (_, Rel::Gt) => Rel::Lt,
                    (_, Rel::Le) => Rel::Ge,
                    (_, Rel::Ge) => Rel::Le,
                    (_, o) => o,
                };
                Expr::Relation { op, lhs: rhs, rhs: lhs }
            }
            other => other,
        },
        RuleId::HypReorder => e,
    }
}

/// Result of [`evolast_variant`] when at least one rewrite applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub file: StatementFile,
    pub steps: Vec<RewriteSite>,
}

/// Applies up to `max_steps` uniformly sampled rewrites, re-enumerating sites
/// after each step. Returns `None` (no change) when the input has no sites.
pub fn evolast_variant(f: &StatementFile, seed: u64, max_steps: usize) -> Option<Variant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = f.clone();
    let mut steps = Vec::new();
    for _ in 0..max_steps {
        let sites = enumerate_sites(&cur);
        let Some(site) = sites.choose(&mut rng) else {
            break;
        };
        cur = apply_rewrite(&cur, site).expect("enumerated site applies");
        steps.push(site.clone());
    }
    if steps.is_empty() {
        None
    } else {
        Some(Variant { file: cur, steps })
    }
}
