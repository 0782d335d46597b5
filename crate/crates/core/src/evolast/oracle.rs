use std::collections::HashMap;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::statement::{print_expr, Conn, Expr, Quant, Rel, StatementFile, SymbolStyle};

pub const DEFAULT_ORACLE_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("assignment space {size} exceeds cap {cap}")]
    OracleTooLarge { size: u128, cap: u64 },
}

/// Truth-table equivalence of two propositions.
///
/// Proposition-position leaves (atoms, applications, opaque spans) become boolean
/// variables keyed by their printed text; relation operands become integer
/// variables ranging over `int_domain` (integer literals keep their value).
/// Quantified subformulas are treated as boolean variables, shared between two
/// occurrences when their headers print identically and their bodies are
/// themselves equivalent. `True`/`False` are constants.
pub fn equiv_oracle(e1: &Expr, e2: &Expr, int_domain: RangeInclusive<i64>) -> Result<bool, OracleError> {
    equiv_oracle_with_cap(e1, e2, int_domain, DEFAULT_ORACLE_CAP)
}

pub fn equiv_oracle_with_cap(e1: &Expr, e2: &Expr, int_domain: RangeInclusive<i64>, cap: u64) -> Result<bool, OracleError> {
    let mut env = Env { domain: int_domain, cap, bools: HashMap::new(), ints: HashMap::new(), quants: Vec::new() };
    let f1 = env.prop(e1)?;
    let f2 = env.prop(e2)?;
    let nb = env.bools.len() as u32;
    let ni = env.ints.len() as u32;
    let width = (*env.domain.end() - *env.domain.start() + 1).max(0) as u128;
    let size = 1u128
        .checked_shl(nb)
        .and_then(|b| width.checked_pow(ni).and_then(|i| b.checked_mul(i)))
        .unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(OracleError::OracleTooLarge { size, cap });
    }
    let lo = *env.domain.start();
    let mut bools = vec![false; nb as usize];
    let mut ints = vec![lo; ni as usize];
    for idx in 0..size {
        let mut rest = idx;
        for b in bools.iter_mut() {
            *b = rest & 1 == 1;
            rest >>= 1;
        }
        for v in ints.iter_mut() {
            *v = lo + (rest % width) as i64;
            rest /= width;
        }
        if f1.eval(&bools, &ints) != f2.eval(&bools, &ints) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The statement as one proposition: each header binder becomes a premise
/// (repeated once per bound name) in front of the goal.
pub fn statement_prop(f: &StatementFile) -> Expr {
    let mut acc = f.goal.clone();
    for b in f.binders.iter().rev() {
        for _ in 0..b.names.len().max(1) {
            acc = Expr::arrow(b.type_expr.clone(), acc);
        }
    }
    acc
}

enum Term {
    Const(i64),
    Var(usize),
}

enum Formula {
    Const(bool),
    Var(usize),
    Not(Box<Formula>),
    Bin(Conn, Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Rel(Rel, Term, Term),
}

impl Formula {
    fn eval(&self, bools: &[bool], ints: &[i64]) -> bool {
        let term = |t: &Term| match t {
            Term::Const(c) => *c,
            Term::Var(i) => ints[*i],
        };
        match self {
            Formula::Const(b) => *b,
            Formula::Var(i) => bools[*i],
            Formula::Not(a) => !a.eval(bools, ints),
            Formula::Bin(op, a, b) => {
                let (x, y) = (a.eval(bools, ints), b.eval(bools, ints));
                match op {
                    Conn::And => x && y,
                    Conn::Or => x || y,
                    _ => x == y,
                }
            }
            Formula::Imp(a, b) => !a.eval(bools, ints) || b.eval(bools, ints),
            Formula::Rel(op, a, b) => {
                let (x, y) = (term(a), term(b));
                match op {
                    Rel::Eq => x == y,
                    Rel::Ne => x != y,
                    Rel::Lt => x < y,
                    Rel::Le => x <= y,
                    Rel::Gt => x > y,
                    Rel::Ge => x >= y,
                }
            }
        }
    }
}

struct Env {
    domain: RangeInclusive<i64>,
    cap: u64,
    bools: HashMap<String, usize>,
    ints: HashMap<String, usize>,
    /// (header text, body, boolean variable) for each quantifier class seen so far.
    quants: Vec<(String, Expr, usize)>,
}

impl Env {
    fn bool_var(&mut self, key: String) -> usize {
        let n = self.bools.len();
        *self.bools.entry(key).or_insert(n)
    }

    fn prop(&mut self, e: &Expr) -> Result<Formula, OracleError> {
        Ok(match e {
            Expr::Atom(a) if a == "True" => Formula::Const(true),
            Expr::Atom(a) if a == "False" => Formula::Const(false),
            Expr::Connective { op: Conn::Not, operands } => Formula::Not(Box::new(self.prop(&operands[0])?)),
            Expr::Connective { op, operands } => {
                Formula::Bin(*op, Box::new(self.prop(&operands[0])?), Box::new(self.prop(&operands[1])?))
            }
            Expr::Arrow(a, b) => Formula::Imp(Box::new(self.prop(a)?), Box::new(self.prop(b)?)),
            Expr::Relation { op, lhs, rhs } => Formula::Rel(*op, self.term(lhs), self.term(rhs)),
            Expr::Quantifier { kind, names, ty, body } => {
                let header = format!(
                    "{}|{}|{}",
                    match kind {
                        Quant::Forall => "forall",
                        Quant::Exists => "exists",
                    },
                    names.join(" "),
                    ty.as_ref().map(|t| print_expr(t, SymbolStyle::Ascii)).unwrap_or_default()
                );
                for i in 0..self.quants.len() {
                    if self.quants[i].0 == header {
                        let rep = self.quants[i].1.clone();
                        if equiv_oracle_with_cap(body, &rep, self.domain.clone(), self.cap)? {
                            return Ok(Formula::Var(self.quants[i].2));
                        }
                    }
                }
                let var = self.bool_var(format!("q{}:{header}", self.quants.len()));
                self.quants.push((header, (**body).clone(), var));
                Formula::Var(var)
            }
            other => Formula::Var(self.bool_var(format!("p:{}", print_expr(other, SymbolStyle::Ascii)))),
        })
    }

    fn term(&mut self, e: &Expr) -> Term {
        let text = print_expr(e, SymbolStyle::Ascii);
        if let Ok(c) = text.parse::<i64>() {
            return Term::Const(c);
        }
        let n = self.ints.len();
        Term::Var(*self.ints.entry(text).or_insert(n))
    }
}
